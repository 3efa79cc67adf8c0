//! The weighted-margin hinge problem
//!
//! ```text
//! min_{f ∈ H_K}  (1/2C)‖f‖²_K + Σᵢ (Cᵢ/C)·(μᵢ − yᵢ f(xᵢ))₊
//! ```
//!
//! and its box-constrained dual
//!
//! ```text
//! max_α  Σᵢ μᵢαᵢ − ½ Σᵢⱼ αᵢαⱼ yᵢyⱼ K(xᵢ,xⱼ)   s.t. 0 ≤ αᵢ ≤ Cᵢ
//! ```
//!
//! There is no intercept, so the dual has no equality constraint and each
//! coordinate can be minimized exactly in closed form. Every supported model
//! family (plain, cost-weighted, confidence-weighted, knowledge points and the
//! region-weighted knowledge model) is a choice of per-sample cost `Cᵢ` and
//! margin `μᵢ`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::domain::BoxDomain;
use crate::error::{ensure_finite, Error, Result};
use crate::kernel::{check_points, gram_unchecked, Expansion, GramMatrix, KernelSpec};
use crate::knowledge::{weight_for, CostStructure, KnowledgeRegion};
use crate::par;

/// Which model family a problem was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemVariant {
    /// Region- and label-weighted hinge. Covers the plain SVM (`ĉ = 1`, `c⁺ = c⁻`).
    Knowledge,
    /// Label-dependent costs: positives `c⁻/c⁺`, negatives 1.
    Lin,
    Confidence,
    KnowledgePoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingProblem {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    /// `Cᵢ = C·wᵢ/m`.
    pub per_sample_cost: Vec<f64>,
    /// `μᵢ`; one except for knowledge pseudo-samples.
    pub per_sample_margin: Vec<f64>,
    pub kernel: KernelSpec,
    /// The trade-off `C`.
    pub trade_off: f64,
    /// Samples with `x ∈ A₊` and `y = +1`.
    pub m1: usize,
    /// `m − m1`.
    pub m2: usize,
    pub variant: ProblemVariant,
    /// Non-fatal notes produced while building (e.g. an empty knowledge grid).
    #[serde(default)]
    pub notes: Vec<String>,
}

impl TrainingProblem {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.len();
        if m == 0 {
            return Err(Error::input("training problem has no samples"));
        }
        if self.points.len() != m || self.per_sample_cost.len() != m || self.per_sample_margin.len() != m {
            return Err(Error::input("training problem arrays have inconsistent lengths"));
        }
        check_points(&self.points)?;
        self.kernel.validate()?;
        check_trade_off(self.trade_off)?;
        if let Some(i) = self
            .per_sample_cost
            .iter()
            .position(|c| !(*c > 0.0 && c.is_finite()))
        {
            return Err(Error::input(format!(
                "per-sample cost {} at index {i} must be positive",
                self.per_sample_cost[i]
            )));
        }
        ensure_finite(&self.per_sample_margin, "per-sample margin")?;
        if self.m1 + self.m2 != m {
            return Err(Error::input("m1 + m2 must equal the sample count"));
        }
        Ok(())
    }

    /// Objective value of the zero function, `Σᵢ (Cᵢ/C) μᵢ`.
    pub fn zero_function_objective(&self) -> f64 {
        self.per_sample_cost
            .iter()
            .zip(&self.per_sample_margin)
            .map(|(c, mu)| c / self.trade_off * mu.max(0.0))
            .sum()
    }

    /// `√(2C·P(0))`: no dual-ascent iterate started from zero can exceed it.
    pub fn norm_bound(&self) -> f64 {
        (2.0 * self.trade_off * self.zero_function_objective()).sqrt()
    }
}

fn check_trade_off(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::input(format!("trade-off C must be positive, got {c}")));
    }
    Ok(())
}

fn check_dataset(dataset: &Dataset) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::input("dataset is empty"));
    }
    dataset.validate()
}

fn weighted_problem(
    dataset: &Dataset,
    weights: Vec<f64>,
    trade_off: f64,
    kernel: KernelSpec,
    variant: ProblemVariant,
) -> TrainingProblem {
    let m = dataset.len() as f64;
    TrainingProblem {
        points: dataset.features.clone(),
        labels: dataset.labels.clone(),
        per_sample_cost: weights.iter().map(|w| trade_off * w / m).collect(),
        per_sample_margin: vec![1.0; dataset.len()],
        kernel,
        trade_off,
        m1: 0,
        m2: dataset.len(),
        variant,
        notes: Vec::new(),
    }
}

/// Region- and label-weighted problem: `Cᵢ = C·wᵢ/m` with `wᵢ` the piecewise
/// loss weight of sample `i`.
pub fn build_problem_knowledge(
    dataset: &Dataset,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    trade_off: f64,
    kernel: KernelSpec,
) -> Result<TrainingProblem> {
    check_dataset(dataset)?;
    costs.validate()?;
    region.validate()?;
    check_trade_off(trade_off)?;
    kernel.validate()?;
    if let Some(n) = region.dim() {
        if n != dataset.dim() {
            return Err(Error::input(format!(
                "region dimension {n} does not match data dimension {}",
                dataset.dim()
            )));
        }
    }
    let mut m1 = 0;
    let weights = dataset
        .features
        .iter()
        .zip(&dataset.labels)
        .map(|(x, &y)| {
            let inside = region.contains_unchecked(x);
            if inside && y.is_positive() {
                m1 += 1;
            }
            weight_for(costs, inside, y)
        })
        .collect();
    let mut p = weighted_problem(dataset, weights, trade_off, kernel, ProblemVariant::Knowledge);
    p.m1 = m1;
    p.m2 = dataset.len() - m1;
    Ok(p)
}

/// The unweighted problem: every `Cᵢ = C/m`.
pub fn build_problem_standard(dataset: &Dataset, trade_off: f64, kernel: KernelSpec) -> Result<TrainingProblem> {
    build_problem_knowledge(
        dataset,
        &CostStructure::unit(),
        &KnowledgeRegion::Empty,
        trade_off,
        kernel,
    )
}

/// Label-dependent costs in false-positive units: positives `C·(c⁻/c⁺)/m`,
/// negatives `C/m`. `ĉ` is ignored.
pub fn build_problem_lin(
    dataset: &Dataset,
    costs: &CostStructure,
    trade_off: f64,
    kernel: KernelSpec,
) -> Result<TrainingProblem> {
    check_dataset(dataset)?;
    costs.validate()?;
    check_trade_off(trade_off)?;
    kernel.validate()?;
    let weights = dataset
        .labels
        .iter()
        .map(|y| if y.is_positive() { costs.c_minus / costs.c_plus } else { 1.0 })
        .collect();
    Ok(weighted_problem(dataset, weights, trade_off, kernel, ProblemVariant::Lin))
}

/// Monotone increasing map `h` from label confidence to sample weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConfidenceMap {
    Identity,
    /// `h(v) = v^exponent`, exponent > 0.
    Power { exponent: f64 },
}

impl ConfidenceMap {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConfidenceMap::Power { exponent } if !(exponent > 0.0 && exponent.is_finite()) => Err(
                Error::input(format!("power map exponent must be positive, got {exponent}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        match *self {
            ConfidenceMap::Identity => v,
            ConfidenceMap::Power { exponent } => v.powf(exponent),
        }
    }
}

/// Confidence-weighted problem: `Cᵢ = C·h(vᵢ)/m`.
pub fn build_problem_confidence(
    dataset: &Dataset,
    confidences: &[f64],
    h: ConfidenceMap,
    trade_off: f64,
    kernel: KernelSpec,
) -> Result<TrainingProblem> {
    check_dataset(dataset)?;
    h.validate()?;
    check_trade_off(trade_off)?;
    kernel.validate()?;
    if confidences.len() != dataset.len() {
        return Err(Error::input(format!(
            "{} confidences for {} samples",
            confidences.len(),
            dataset.len()
        )));
    }
    if let Some(i) = confidences.iter().position(|v| !(*v > 0.0 && *v <= 1.0)) {
        return Err(Error::input(format!(
            "confidence {} at index {i} is outside (0, 1]",
            confidences[i]
        )));
    }
    let weights = confidences.iter().map(|&v| h.apply(v)).collect();
    Ok(weighted_problem(dataset, weights, trade_off, kernel, ProblemVariant::Confidence))
}

/// Discretization of a bounded box used to place knowledge pseudo-samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGrid {
    #[serde(rename = "box")]
    pub domain: BoxDomain,
    pub counts: Vec<usize>,
}

/// Appends one positive pseudo-sample per grid point with `g(x) ≤ 0`, with
/// margin `1 − v·g(x)`. All samples, original and pseudo, get `C/m` where `m`
/// counts both.
pub fn build_problem_knowledge_points(
    dataset: &Dataset,
    region_g: &KnowledgeRegion,
    v: f64,
    grid: &KnowledgeGrid,
    trade_off: f64,
    kernel: KernelSpec,
) -> Result<TrainingProblem> {
    check_dataset(dataset)?;
    region_g.validate()?;
    check_trade_off(trade_off)?;
    kernel.validate()?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::input(format!("knowledge multiplier v must be >= 0, got {v}")));
    }
    grid.domain.validate()?;
    if grid.domain.dim() != dataset.dim() {
        return Err(Error::input("knowledge grid dimension does not match data dimension"));
    }
    if let Some(n) = region_g.dim() {
        if n != dataset.dim() {
            return Err(Error::input("region dimension does not match data dimension"));
        }
    }
    let mut points = dataset.features.clone();
    let mut labels = dataset.labels.clone();
    let mut margins = vec![1.0; dataset.len()];
    for x in grid.domain.grid(&grid.counts)? {
        let g = region_g.g_unchecked(&x);
        if g <= 0.0 {
            margins.push(1.0 - v * g);
            points.push(x);
            labels.push(Label::Positive);
        }
    }
    let p = points.len() - dataset.len();
    let mut notes = Vec::new();
    if p == 0 {
        notes.push("knowledge grid has no points inside the region; no pseudo-samples added".to_string());
        log::warn!("{}", notes[0]);
    }
    let m = points.len();
    Ok(TrainingProblem {
        per_sample_cost: vec![trade_off * 1.0 / m as f64; m],
        per_sample_margin: margins,
        points,
        labels,
        kernel,
        trade_off,
        m1: 0,
        m2: m,
        variant: ProblemVariant::KnowledgePoints,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Projected-gradient optimality threshold; also bounds the relative
    /// duality gap at convergence.
    pub tolerance: f64,
    pub max_passes: usize,
    pub shuffle_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-6,
            max_passes: 10_000,
            shuffle_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::input("solver tolerance must be positive"));
        }
        if self.max_passes < 1 {
            return Err(Error::input("solver max_passes must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub passes: usize,
    pub converged: bool,
    /// Largest projected-gradient magnitude at the returned point.
    pub max_violation: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub rkhs_norm: f64,
    /// `√(2C·P(0))`; equals `√(2CM̃)` for knowledge problems.
    pub norm_bound: f64,
    /// Coordinates with `K(xᵢ,xᵢ) = 0`, held at zero.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kernel: KernelSpec,
    pub trade_off: f64,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub alphas: Vec<f64>,
    pub per_sample_cost: Vec<f64>,
    pub per_sample_margin: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

impl TrainedModel {
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.alphas.len()).filter(|&i| self.alphas[i] > 0.0).collect()
    }

    /// The decision function restricted to support vectors.
    pub fn expansion(&self) -> Expansion {
        let idx = self.support_indices();
        Expansion {
            kernel: self.kernel,
            coefficients: idx.iter().map(|&i| self.alphas[i] * self.labels[i].sign()).collect(),
            centers: idx.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// `f(x) = Σᵢ αᵢ yᵢ K(xᵢ, x)`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        crate::kernel::eval_expansion(&self.alphas, &self.labels, &self.points, &self.kernel, x)
    }

    pub fn rkhs_norm(&self) -> f64 {
        self.diagnostics.rkhs_norm
    }
}

/// Values `f(xᵢ)` at the training points, summing over `j` in ascending order.
fn training_outputs(gram: &GramMatrix, alphas: &[f64], labels: &[Label]) -> Vec<f64> {
    let coef: Vec<(usize, f64)> = alphas
        .iter()
        .zip(labels)
        .enumerate()
        .filter(|(_, (a, _))| **a != 0.0)
        .map(|(j, (a, y))| (j, a * y.sign()))
        .collect();
    par::map_range(gram.point_count(), |i| {
        let row = gram.row(i);
        coef.iter().map(|&(j, c)| c * row[j]).sum()
    })
}

struct Objectives {
    primal: f64,
    dual: f64,
    norm_sq: f64,
}

fn objectives(
    alphas: &[f64],
    labels: &[Label],
    costs: &[f64],
    margins: &[f64],
    trade_off: f64,
    f: &[f64],
) -> Objectives {
    let norm_sq: f64 = alphas
        .iter()
        .zip(labels)
        .zip(f)
        .map(|((a, y), fi)| a * y.sign() * fi)
        .sum::<f64>()
        .max(0.0);
    let hinge: f64 = labels
        .iter()
        .zip(f)
        .zip(costs.iter().zip(margins))
        .map(|((y, fi), (c, mu))| c * (mu - y.sign() * fi).max(0.0))
        .sum();
    let linear: f64 = alphas.iter().zip(margins).map(|(a, mu)| a * mu).sum();
    Objectives {
        primal: (0.5 * norm_sq + hinge) / trade_off,
        dual: (linear - 0.5 * norm_sq) / trade_off,
        norm_sq,
    }
}

/// Largest projected-gradient magnitude of the (minimization form of the) dual.
fn max_violation(alphas: &[f64], labels: &[Label], costs: &[f64], margins: &[f64], f: &[f64], active: &[bool]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..alphas.len() {
        if !active[i] {
            continue;
        }
        let g = labels[i].sign() * f[i] - margins[i];
        let pg = if alphas[i] <= 0.0 {
            g.min(0.0)
        } else if alphas[i] >= costs[i] {
            g.max(0.0)
        } else {
            g
        };
        worst = worst.max(pg.abs());
    }
    worst
}

/// Solves the dual by cyclic coordinate descent over a freshly shuffled
/// order each pass. Each step is the exact clipped Newton update
/// `αᵢ ← clamp(αᵢ + (μᵢ − yᵢf(xᵢ))/K(xᵢ,xᵢ), 0, Cᵢ)`.
///
/// Converged means the projected-gradient violation is at most `tolerance`
/// and the duality gap at most `tolerance·(1 + |primal|)`, both measured on
/// freshly recomputed outputs. Samples with `K(xᵢ,xᵢ) = 0` keep `αᵢ = 0`
/// and their constant hinge is left out of the gap used for stopping.
/// Running out of passes is not an error; the model comes back with
/// `converged = false`.
pub fn solve_dual(problem: &TrainingProblem, config: &SolverConfig) -> Result<TrainedModel> {
    problem.validate()?;
    config.validate()?;
    let gram = gram_unchecked(&problem.kernel, &problem.points);
    if gram.entries().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("kernel produced non-finite values".into()));
    }
    Ok(solve_with_gram(problem, config, &gram))
}

pub(crate) fn solve_with_gram(problem: &TrainingProblem, config: &SolverConfig, gram: &GramMatrix) -> TrainedModel {
    let m = problem.len();
    let labels = &problem.labels;
    let costs = &problem.per_sample_cost;
    let margins = &problem.per_sample_margin;
    let diag = gram.diagonal();
    let active: Vec<bool> = diag.iter().map(|d| *d > 0.0).collect();
    let skipped = active.iter().filter(|a| !**a).count();
    // skipped samples pin α at 0 but still pay their full hinge in the primal
    let skipped_hinge: f64 = (0..m)
        .filter(|&i| !active[i])
        .map(|i| costs[i] * margins[i].max(0.0))
        .sum::<f64>()
        / problem.trade_off;

    let mut alphas = vec![0.0; m];
    let mut f = vec![0.0; m];
    let mut order: Vec<usize> = (0..m).filter(|&i| active[i]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.shuffle_seed);

    let mut passes = 0;
    let mut converged = false;
    let mut violation = f64::INFINITY;
    while passes < config.max_passes {
        passes += 1;
        order.shuffle(&mut rng);
        for &i in &order {
            let yi = labels[i].sign();
            let g = yi * f[i] - margins[i];
            let next = (alphas[i] - g / diag[i]).clamp(0.0, costs[i]);
            let delta = next - alphas[i];
            if delta != 0.0 {
                alphas[i] = next;
                let s = delta * yi;
                for (fj, kij) in f.iter_mut().zip(gram.row(i)) {
                    *fj += s * kij;
                }
            }
        }
        violation = max_violation(&alphas, labels, costs, margins, &f, &active);
        if violation <= config.tolerance {
            // incremental updates drift; confirm on exact outputs
            f = training_outputs(gram, &alphas, labels);
            violation = max_violation(&alphas, labels, costs, margins, &f, &active);
            let obj = objectives(&alphas, labels, costs, margins, problem.trade_off, &f);
            let gap = obj.primal - obj.dual - skipped_hinge;
            if violation <= config.tolerance && gap <= config.tolerance * (1.0 + obj.primal.abs()) {
                converged = true;
                break;
            }
        }
    }

    let f = training_outputs(gram, &alphas, labels);
    let obj = objectives(&alphas, labels, costs, margins, problem.trade_off, &f);
    if violation.is_finite() {
        violation = max_violation(&alphas, labels, costs, margins, &f, &active);
    }
    debug_assert!(
        obj.norm_sq.sqrt() <= problem.norm_bound() * (1.0 + NORM_BOUND_SLACK),
        "norm {} exceeds bound {}",
        obj.norm_sq.sqrt(),
        problem.norm_bound()
    );
    if !converged {
        log::warn!(
            "dual coordinate descent stopped after {passes} passes with violation {violation:.3e}"
        );
    }
    TrainedModel {
        kernel: problem.kernel,
        trade_off: problem.trade_off,
        points: problem.points.clone(),
        labels: labels.clone(),
        per_sample_cost: costs.clone(),
        per_sample_margin: margins.clone(),
        diagnostics: SolverDiagnostics {
            passes,
            converged,
            max_violation: violation,
            primal_objective: obj.primal,
            dual_objective: obj.dual,
            duality_gap: obj.primal - obj.dual,
            rkhs_norm: obj.norm_sq.sqrt(),
            norm_bound: problem.norm_bound(),
            skipped,
        },
        alphas,
    }
}

fn check_pair(model: &TrainedModel, problem: &TrainingProblem) -> Result<()> {
    if model.points != problem.points
        || model.labels != problem.labels
        || model.alphas.len() != problem.len()
        || model.kernel != problem.kernel
    {
        return Err(Error::input("model was not trained on this problem"));
    }
    Ok(())
}

fn pair_objectives(model: &TrainedModel, problem: &TrainingProblem) -> Result<Objectives> {
    check_pair(model, problem)?;
    problem.validate()?;
    let gram = gram_unchecked(&problem.kernel, &problem.points);
    let f = training_outputs(&gram, &model.alphas, &model.labels);
    Ok(objectives(
        &model.alphas,
        &problem.labels,
        &problem.per_sample_cost,
        &problem.per_sample_margin,
        problem.trade_off,
        &f,
    ))
}

/// `(1/2C)‖f‖² + Σᵢ (Cᵢ/C)(μᵢ − yᵢf(xᵢ))₊`.
pub fn primal_objective(model: &TrainedModel, problem: &TrainingProblem) -> Result<f64> {
    Ok(pair_objectives(model, problem)?.primal)
}

/// `(Σᵢ μᵢαᵢ − ½‖f‖²)/C`, in the same units as the primal.
pub fn dual_objective(model: &TrainedModel, problem: &TrainingProblem) -> Result<f64> {
    Ok(pair_objectives(model, problem)?.dual)
}

pub fn duality_gap(model: &TrainedModel, problem: &TrainingProblem) -> Result<f64> {
    let o = pair_objectives(model, problem)?;
    Ok(o.primal - o.dual)
}

/// `sgn(f(x))` with `sgn(0) = +1`.
pub fn predict(model: &TrainedModel, x: &[f64]) -> Result<Label> {
    Ok(Label::from_value(model.decision_value(x)?))
}

/// Clamp to `[−1, 1]`.
pub fn project_pi(f_value: f64) -> Result<f64> {
    if !f_value.is_finite() {
        return Err(Error::input(format!("cannot project non-finite value {f_value}")));
    }
    Ok(f_value.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBoundCheck {
    pub norm: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Relative slack allowed on norm-bound comparisons.
pub const NORM_BOUND_SLACK: f64 = 1e-9;

/// `‖f‖_K ≤ √(2CM̃)` with `M̃ = (c⁻/c⁺)(ĉm₁ + m₂)/m`.
pub fn check_norm_bound(
    model: &TrainedModel,
    problem: &TrainingProblem,
    costs: &CostStructure,
) -> Result<NormBoundCheck> {
    check_pair(model, problem)?;
    costs.validate()?;
    if problem.per_sample_margin.iter().any(|mu| *mu != 1.0) {
        return Err(Error::Unsupported(
            "norm bound needs unit margins on every sample".into(),
        ));
    }
    let m = problem.len() as f64;
    let m_tilde = costs.c_minus / costs.c_plus * (costs.c_hat * problem.m1 as f64 + problem.m2 as f64) / m;
    let bound = (2.0 * problem.trade_off * m_tilde).sqrt();
    let norm = pair_objectives(model, problem)?.norm_sq.sqrt();
    Ok(NormBoundCheck {
        norm,
        bound,
        holds: norm <= bound * (1.0 + NORM_BOUND_SLACK),
    })
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: TrainedModel,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<serde_json::Value>,
}

pub fn model_to_json(model: &TrainedModel) -> Result<String> {
    serde_json::to_string_pretty(&ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    })
    .map_err(|e| Error::Format(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<TrainedModel> {
    let probe: VersionProbe =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("model file: {e}")))?;
    match probe.format_version.as_ref().and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
        other => {
            return Err(Error::Format(format!(
                "unsupported model format_version {other:?}, expected {MODEL_FORMAT_VERSION}"
            )))
        }
    }
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("model file: {e}")))?;
    let model = file.model;
    validate_model(&model)?;
    Ok(model)
}

fn validate_model(model: &TrainedModel) -> Result<()> {
    model.kernel.validate()?;
    let m = model.alphas.len();
    if model.points.len() != m
        || model.labels.len() != m
        || model.per_sample_cost.len() != m
        || model.per_sample_margin.len() != m
    {
        return Err(Error::Validation("model arrays have inconsistent lengths".into()));
    }
    if m > 0 {
        check_points(&model.points).map_err(|e| Error::Validation(e.to_string()))?;
    }
    for (i, (a, c)) in model.alphas.iter().zip(&model.per_sample_cost).enumerate() {
        if !(*a >= 0.0 && a <= c) {
            return Err(Error::Validation(format!(
                "alpha {a} at index {i} is outside [0, {c}]"
            )));
        }
    }
    Ok(())
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
