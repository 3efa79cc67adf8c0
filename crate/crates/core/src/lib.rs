//! Kernel hinge-loss classifiers whose losses are weighted by label and by
//! membership in a prior-knowledge region, together with exact evaluation
//! tools for synthetic distributions.
//!
//! * [`kernel`]: kernels, Gram matrices, kernel expansions.
//! * [`knowledge`]: knowledge regions, cost structures, the weighted loss.
//! * [`trainer`]: problem builders and the dual coordinate-descent solver.
//! * [`oracle`]: synthetic distributions, utility and error integrals, bounds.
//! * [`experiments`]: convergence and comparison studies.

pub mod dataset;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod knowledge;
pub mod oracle;
pub mod par;
pub mod quadrature;
pub mod trainer;

pub use dataset::{load_dataset, parse_dataset, save_dataset, write_dataset, Dataset, Label};
pub use domain::BoxDomain;
pub use error::{Error, Result};
pub use kernel::{eval_expansion, eval_kernel, gram_matrix, kernel_sup, rkhs_norm_sq, Expansion, GramMatrix, KernelSpec};
pub use knowledge::{
    chi_indicator, piecewise_loss, region_membership, sample_weight, sample_weight_closed_form, CostStructure,
    KnowledgeConfig, KnowledgeRegion,
};
pub use oracle::{
    empirical_error, empirical_utility, eta, generalization_error, optimal_classifier_fq, pointwise_minimizer,
    sample_dataset, sample_error_bound, utility, QuadratureSpec, SyntheticDistribution, UtilityReport,
};
pub use trainer::{
    build_problem_confidence, build_problem_knowledge, build_problem_knowledge_points, build_problem_lin,
    build_problem_standard, check_norm_bound, dual_objective, duality_gap, load_model, predict, primal_objective,
    project_pi, save_model, solve_dual, SolverConfig, TrainedModel, TrainingProblem,
};
