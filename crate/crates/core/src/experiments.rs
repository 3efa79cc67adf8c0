//! Seeded experiment harness: convergence runs with `C = m^γ`, model-family
//! comparisons on shared data, the utility/generalization-error inequality
//! sweep, and CSV/JSON report emission.
//!
//! Cells are independent and run in parallel; rows are sorted before they
//! are returned, so output bytes never depend on scheduling.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::kernel::{kernel_sup, Expansion, KernelSpec};
use crate::knowledge::{weight_for, CostStructure, KnowledgeRegion};
use crate::oracle::{
    empirical_error, sample_dataset, sample_error_bound, EtaSpec, ExpectationRule, Marginal, MixtureComponent,
    QuadratureSpec, SampleMix, SyntheticDistribution, UtilityReport,
};
use crate::par;
use crate::trainer::{
    build_problem_confidence, build_problem_knowledge, build_problem_knowledge_points, build_problem_lin,
    build_problem_standard, solve_dual, ConfidenceMap, KnowledgeGrid, SolverConfig, TrainedModel, TrainingProblem,
};

/// Quadrature tolerance for integrands with a discontinuity.
pub const EPSILON_QUAD: f64 = 1e-3;

/// Golden-ratio increment used to decorrelate per-cell seeds.
const SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// `base ⊕ (m·0x9E3779B97F4A7C15 + rep)`, wrapping.
pub fn cell_seed(base_seed: u64, m: usize, rep: usize) -> u64 {
    base_seed ^ (m as u64).wrapping_mul(SEED_MIX).wrapping_add(rep as u64)
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub distribution: SyntheticDistribution,
    pub costs: CostStructure,
    pub region: KnowledgeRegion,
    pub kernel: KernelSpec,
    /// `C = m^γ`.
    pub gamma: f64,
    pub m_grid: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    /// Confidence level parameter of the reported sample-error bound.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

/// Rough ceiling on total Gram entries across all cells.
pub const MAX_KERNEL_EVALUATIONS: f64 = 1e9;

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        self.costs.validate()?;
        self.region.validate()?;
        self.kernel.validate()?;
        self.solver.validate()?;
        self.quadrature.validate()?;
        if let Some(n) = self.region.dim() {
            if n != self.distribution.dim() {
                return Err(Error::input("region dimension does not match distribution dimension"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::input(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if self.m_grid.is_empty() || self.m_grid[0] == 0 {
            return Err(Error::input("m_grid must be non-empty with positive sizes"));
        }
        if self.m_grid.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::input("m_grid must be strictly ascending"));
        }
        if self.repetitions == 0 {
            return Err(Error::input("repetitions must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input("delta must lie in (0, 1)"));
        }
        let work: f64 = self.m_grid.iter().map(|&m| (m as f64).powi(2)).sum::<f64>() * self.repetitions as f64;
        if work > MAX_KERNEL_EVALUATIONS {
            return Err(Error::input(format!(
                "plan needs ~{work:.1e} kernel evaluations, above the {MAX_KERNEL_EVALUATIONS:.0e} ceiling"
            )));
        }
        Ok(())
    }

    pub fn trade_off(&self, m: usize) -> f64 {
        (m as f64).powf(self.gamma)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: ExperimentPlan =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("experiment plan: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn cells(&self) -> Vec<(usize, usize)> {
        self.m_grid
            .iter()
            .flat_map(|&m| (0..self.repetitions).map(move |r| (m, r)))
            .collect()
    }
}

/// A named synthetic setting: distribution plus the costs and region that
/// define its utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundledCase {
    pub name: String,
    pub distribution: SyntheticDistribution,
    pub costs: CostStructure,
    pub region: KnowledgeRegion,
}

/// Uniform on [0,1]², logistic `η` with `w = (4, −4)`, `b = 0`; region is
/// the ball of radius 0.25 at (0.3, 0.7); `c⁺ = c⁻ = 1`, `ĉ = 4`.
pub fn default_case() -> BundledCase {
    BundledCase {
        name: "logistic_square".into(),
        distribution: SyntheticDistribution {
            marginal: Marginal::Uniform,
            eta: EtaSpec::Logistic { w: vec![4.0, -4.0], b: 0.0 },
            domain: BoxDomain::unit(2),
        },
        costs: CostStructure { c_plus: 1.0, c_minus: 1.0, c_hat: 4.0 },
        region: KnowledgeRegion::Ball { center: vec![0.3, 0.7], radius: 0.25 },
    }
}

/// The three bundled settings: the default one, a two-component mixture with
/// a piecewise-constant `η`, and a uniform cube with an affine `η`.
pub fn bundled_cases() -> Vec<BundledCase> {
    vec![
        default_case(),
        BundledCase {
            name: "mixture_piecewise".into(),
            distribution: SyntheticDistribution {
                marginal: Marginal::GaussianMixture {
                    components: vec![
                        MixtureComponent { weight: 0.6, mean: vec![0.3, 0.4], std: vec![0.2, 0.25] },
                        MixtureComponent { weight: 0.4, mean: vec![0.75, 0.7], std: vec![0.15, 0.2] },
                    ],
                },
                eta: EtaSpec::PiecewiseConstant {
                    breaks: vec![vec![0.35, 0.7], vec![0.5]],
                    values: vec![0.15, 0.35, 0.3, 0.6, 0.8, 0.9],
                },
                domain: BoxDomain::unit(2),
            },
            costs: CostStructure { c_plus: 1.0, c_minus: 1.0, c_hat: 2.0 },
            region: KnowledgeRegion::Halfspace { a: vec![1.0, 1.0], b: -0.9 },
        },
        BundledCase {
            name: "affine_cube".into(),
            distribution: SyntheticDistribution {
                marginal: Marginal::Uniform,
                eta: EtaSpec::Affine { w: vec![0.3, 0.2, -0.25], b: 0.4 },
                domain: BoxDomain::unit(3),
            },
            costs: CostStructure { c_plus: 2.0, c_minus: 2.0, c_hat: 3.0 },
            region: KnowledgeRegion::Box { lower: vec![0.0, 0.0, 0.0], upper: vec![0.5, 0.6, 1.0] },
        },
    ]
}

/// The bundled convergence plan on [`default_case`]: Gaussian kernel,
/// `γ = 0.5`, `m ∈ {50, …, 1600}`, 10 repetitions.
pub fn default_plan() -> ExperimentPlan {
    let case = default_case();
    ExperimentPlan {
        distribution: case.distribution,
        costs: case.costs,
        region: case.region,
        kernel: KernelSpec::Gaussian { sigma: 0.2 },
        gamma: 0.5,
        m_grid: vec![50, 100, 200, 400, 800, 1600],
        repetitions: 10,
        base_seed: 20_240_601,
        solver: SolverConfig::default(),
        quadrature: QuadratureSpec::default(),
        delta: default_delta(),
    }
}

/// Where the confidence variant's per-sample confidences come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceSource {
    /// `max(η(x), 1 − η(x))` from the true distribution.
    #[default]
    Eta,
    /// Confidence 1 for every sample.
    Unit,
}

/// A model family to train in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariantSpec {
    Standard,
    Lin,
    Knowledge,
    Confidence {
        map: ConfidenceMap,
        #[serde(default)]
        source: ConfidenceSource,
    },
    KnowledgePoints { v: f64, grid: KnowledgeGrid },
}

impl VariantSpec {
    pub fn name(&self) -> &'static str {
        match self {
            VariantSpec::Standard => "standard",
            VariantSpec::Lin => "lin",
            VariantSpec::Knowledge => "knowledge",
            VariantSpec::Confidence { .. } => "confidence",
            VariantSpec::KnowledgePoints { .. } => "knowledge_points",
        }
    }

    /// All five families with default parameters for `plan`.
    pub fn all_defaults(plan: &ExperimentPlan) -> Vec<VariantSpec> {
        let n = plan.distribution.dim();
        vec![
            VariantSpec::Standard,
            VariantSpec::Lin,
            VariantSpec::Knowledge,
            VariantSpec::Confidence { map: ConfidenceMap::Identity, source: ConfidenceSource::Eta },
            VariantSpec::KnowledgePoints {
                v: 1.0,
                grid: KnowledgeGrid { domain: plan.distribution.domain.clone(), counts: vec![8; n] },
            },
        ]
    }

    fn build(&self, plan: &ExperimentPlan, data: &Dataset, trade_off: f64) -> Result<TrainingProblem> {
        match self {
            VariantSpec::Standard => build_problem_standard(data, trade_off, plan.kernel),
            VariantSpec::Lin => build_problem_lin(data, &plan.costs, trade_off, plan.kernel),
            VariantSpec::Knowledge => build_problem_knowledge(data, &plan.costs, &plan.region, trade_off, plan.kernel),
            VariantSpec::Confidence { map, source } => {
                let conf: Vec<f64> = match (source, &data.confidences) {
                    (_, Some(v)) => v.clone(),
                    (ConfidenceSource::Unit, None) => vec![1.0; data.len()],
                    (ConfidenceSource::Eta, None) => data
                        .features
                        .iter()
                        .map(|x| {
                            let e = plan.distribution.eta_unchecked(x);
                            e.max(1.0 - e)
                        })
                        .collect(),
                };
                build_problem_confidence(data, &conf, *map, trade_off, plan.kernel)
            }
            VariantSpec::KnowledgePoints { v, grid } => {
                build_problem_knowledge_points(data, &plan.region, *v, grid, trade_off, plan.kernel)
            }
        }
    }
}

/// One trained cell. `gen_error` onward are JSON-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: String,
    pub m: usize,
    pub rep: usize,
    pub seed: u64,
    #[serde(rename = "C")]
    pub trade_off: f64,
    /// `U(f_q) − U(sgn f_z)`.
    pub gap: f64,
    pub utility: f64,
    pub u_fq: f64,
    /// `E_z(f_z)` under the plan's loss.
    pub emp_error: f64,
    pub norm: f64,
    /// `√(2C·P(0))`, which is `√(2CM̃)` for the knowledge family.
    pub norm_bound: f64,
    /// `ε_rad + rad_term + ε_hoeff` at the plan's `δ`.
    pub theory_bound: f64,
    pub converged: bool,
    /// `E(f_z)` by quadrature.
    pub gen_error: f64,
    /// `ε_rad + rad_term`.
    pub rademacher_bound: f64,
    pub expected_cost: f64,
    pub misclassification_error: f64,
    pub passes: usize,
    pub duality_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub variant: String,
    pub m: usize,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub summary: Vec<GapSummary>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    fn from_rows(mut rows: Vec<ReportRow>, notes: Vec<String>) -> Self {
        rows.sort_by(|a, b| (&a.variant, a.m, a.rep).cmp(&(&b.variant, b.m, b.rep)));
        let mut summary = Vec::new();
        let mut i = 0;
        while i < rows.len() {
            let j = i + rows[i..]
                .iter()
                .take_while(|r| r.variant == rows[i].variant && r.m == rows[i].m)
                .count();
            let gaps: Vec<f64> = rows[i..j].iter().map(|r| r.gap).collect();
            summary.push(GapSummary {
                variant: rows[i].variant.clone(),
                m: rows[i].m,
                median: quantile(&gaps, 0.5),
                lower_quartile: quantile(&gaps, 0.25),
                upper_quartile: quantile(&gaps, 0.75),
            });
            i = j;
        }
        ExperimentReport { rows, summary, notes }
    }

    /// Summary rows of one variant, in ascending `m`.
    pub fn summary_for(&self, variant: &str) -> Vec<&GapSummary> {
        self.summary.iter().filter(|s| s.variant == variant).collect()
    }

    /// Rows whose gap is below `−EPSILON_QUAD` or whose norm exceeds its
    /// bound.
    pub fn invariant_violations(&self) -> Vec<&ReportRow> {
        self.rows
            .iter()
            .filter(|r| r.gap < -EPSILON_QUAD || r.norm > r.norm_bound * (1.0 + 1e-9))
            .collect()
    }
}

/// Linear-interpolation quantile (type 7).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Outcome of the decreasing-gap check on a summary series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    /// Adjacent pairs where the median gap went up.
    pub inversions: usize,
    /// Last median over first median.
    pub ratio: f64,
    pub passed: bool,
}

/// At most `max_inversions` adjacent increases and a final/initial median
/// ratio of at most `max_ratio`.
pub fn check_trend(medians: &[f64], max_inversions: usize, max_ratio: f64) -> TrendCheck {
    let inversions = medians.windows(2).filter(|p| p[1] > p[0]).count();
    let ratio = match (medians.first(), medians.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        (Some(_), Some(&b)) if b <= 0.0 => 0.0,
        _ => f64::INFINITY,
    };
    TrendCheck {
        inversions,
        ratio,
        passed: inversions <= max_inversions && ratio <= max_ratio,
    }
}

struct CellContext<'a> {
    plan: &'a ExperimentPlan,
    rule: &'a ExpectationRule,
    fq_report: UtilityReport,
    kappa: f64,
}

fn evaluate_cell(
    ctx: &CellContext,
    variant: &VariantSpec,
    data: &Dataset,
    m: usize,
    rep: usize,
    seed: u64,
) -> Result<(ReportRow, TrainedModel)> {
    let plan = ctx.plan;
    let trade_off = plan.trade_off(m);
    let problem = variant.build(plan, data, trade_off)?;
    let solver = SolverConfig { shuffle_seed: seed, ..plan.solver };
    let model = solve_dual(&problem, &solver)?;
    if !model.diagnostics.converged {
        log::warn!("{} cell m={m} rep={rep} did not converge", variant.name());
    }
    let f = model.expansion();
    let values = ctx.rule.evaluate(|x| f.eval(x));
    let labels: Vec<f64> = values.iter().map(|v| Label::from_value(*v).sign()).collect();
    let u = ctx.rule.utility_from_labels(&plan.costs, &plan.region, &labels)?;
    let gen_error = ctx.rule.generalization_error_from_values(&plan.costs, &plan.region, &values)?;
    let emp_error = empirical_error(data, &plan.costs, &plan.region, |x| f.eval(x))?;
    let m1 = data
        .features
        .iter()
        .zip(&data.labels)
        .filter(|(x, y)| y.is_positive() && plan.region.contains_unchecked(x))
        .count();
    let bound = sample_error_bound(m, trade_off, plan.delta, &plan.costs, SampleMix { m1, m2: m - m1 }, ctx.kappa)?;
    let d = &model.diagnostics;
    let row = ReportRow {
        variant: variant.name().to_string(),
        m,
        rep,
        seed,
        trade_off,
        gap: ctx.fq_report.utility - u.utility,
        utility: u.utility,
        u_fq: ctx.fq_report.utility,
        emp_error,
        norm: d.rkhs_norm,
        norm_bound: d.norm_bound,
        theory_bound: bound.total,
        converged: d.converged,
        gen_error,
        rademacher_bound: bound.epsilon_rad + bound.rad_term,
        expected_cost: u.expected_cost,
        misclassification_error: u.misclassification_error,
        passes: d.passes,
        duality_gap: d.duality_gap,
    };
    Ok((row, model))
}

fn run_cells(plan: &ExperimentPlan, variants: &[VariantSpec]) -> Result<ExperimentReport> {
    plan.validate()?;
    if variants.is_empty() {
        return Err(Error::input("no variants requested"));
    }
    let rule = ExpectationRule::new(&plan.distribution, &plan.quadrature)?;
    let fq = rule.fq_labels(&plan.costs, &plan.region);
    let fq_report = rule.utility_from_labels(&plan.costs, &plan.region, &fq)?;
    let ctx = CellContext {
        plan,
        rule: &rule,
        fq_report,
        kappa: kernel_sup(&plan.kernel, &plan.distribution.domain)?,
    };
    let cells = plan.cells();
    let per_cell: Vec<Result<Vec<ReportRow>>> = par::map_slice(&cells, |&(m, rep)| {
        let seed = cell_seed(plan.base_seed, m, rep);
        let data = sample_dataset(&plan.distribution, m, seed)?;
        variants
            .iter()
            .map(|v| evaluate_cell(&ctx, v, &data, m, rep, seed).map(|(row, _)| row))
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_cell {
        rows.extend(r?);
    }
    let mut notes = vec![
        "gap = U(f_q) - U(sgn f_z), both by the plan's quadrature rule".to_string(),
        "trend thresholds (one inversion, ratio 0.25) are harness choices, not theoretical constants".to_string(),
    ];
    if rule.is_monte_carlo() {
        notes.push("utilities are Monte Carlo estimates (dimension above 3)".to_string());
    }
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        notes.push(format!("{unconverged} cell(s) hit max_passes before converging"));
    }
    Ok(ExperimentReport::from_rows(rows, notes))
}

/// Trains the knowledge model on every `(m, rep)` cell with `C = m^γ` and
/// scores it against `f_q`.
pub fn convergence_run(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    run_cells(plan, &[VariantSpec::Knowledge])
}

/// Trains every listed variant on the same sample in each cell and scores
/// all of them under the plan's costs and region.
pub fn comparison_run(plan: &ExperimentPlan, variants: &[VariantSpec]) -> Result<ExperimentReport> {
    if let Some(v) = variants.iter().find_map(|v| match v {
        VariantSpec::KnowledgePoints { v, .. } if !(*v >= 0.0 && v.is_finite()) => Some(*v),
        _ => None,
    }) {
        return Err(Error::input(format!("knowledge_points multiplier must be >= 0, got {v}")));
    }
    run_cells(plan, variants)
}

/// Trains a single variant on one explicit dataset (used by the CLI and
/// by tests that need the model itself).
pub fn train_variant(
    plan: &ExperimentPlan,
    variant: &VariantSpec,
    data: &Dataset,
    trade_off: f64,
    shuffle_seed: u64,
) -> Result<TrainedModel> {
    let problem = variant.build(plan, data, trade_off)?;
    solve_dual(&problem, &SolverConfig { shuffle_seed, ..plan.solver })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Record {
    pub n_functions: usize,
    /// Functions where `U(f_q) − U(sgn f) − (E(f) − E(f_q)) > EPSILON_QUAD`.
    pub violations: usize,
    /// Largest `U(f_q) − U(sgn f) − (E(f) − E(f_q))` seen.
    pub max_excess: f64,
}

/// One side-by-side evaluation of the inequality for a given `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Sides {
    pub utility_gap: f64,
    pub error_gap: f64,
}

/// Both sides of `U(f_q) − U(sgn f) ≤ E(f) − E(f_q)` for `f` given by its
/// values at the rule's nodes.
pub fn theorem2_sides(
    rule: &ExpectationRule,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    values: &[f64],
) -> Result<Theorem2Sides> {
    let fq = rule.fq_labels(costs, region);
    let labels: Vec<f64> = values.iter().map(|v| Label::from_value(*v).sign()).collect();
    let u = rule.utility_from_labels(costs, region, &labels)?;
    let e_f = rule.generalization_error_from_values(costs, region, values)?;
    let e_fq = rule.generalization_error_from_values(costs, region, &fq)?;
    Ok(Theorem2Sides {
        utility_gap: u.utility_gap,
        error_gap: e_f - e_fq,
    })
}

/// Draws `n_functions` random expansions (10 centers uniform in the box,
/// coefficients uniform in [−2, 2]) and checks the inequality for each.
pub fn theorem2_check(
    dist: &SyntheticDistribution,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    kernel: &KernelSpec,
    n_functions: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<Theorem2Record> {
    if n_functions == 0 {
        return Err(Error::input("n_functions must be at least 1"));
    }
    dist.validate()?;
    costs.validate()?;
    region.validate()?;
    kernel.validate()?;
    if let Some(n) = region.dim() {
        if n != dist.dim() {
            return Err(Error::input("region dimension does not match distribution dimension"));
        }
    }
    let rule = ExpectationRule::new(dist, quad)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = &dist.domain;
    let functions: Vec<Expansion> = (0..n_functions)
        .map(|_| {
            let centers: Vec<Vec<f64>> = (0..10)
                .map(|_| {
                    (0..dom.dim())
                        .map(|k| rng.random_range(dom.lower[k]..=dom.upper[k]))
                        .collect()
                })
                .collect();
            let coefs: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..=2.0)).collect();
            Expansion::new(*kernel, coefs, centers)
        })
        .collect::<Result<_>>()?;
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for f in &functions {
        let values = rule.evaluate(|x| f.eval(x));
        let s = theorem2_sides(&rule, costs, region, &values)?;
        let excess = s.utility_gap - s.error_gap;
        max_excess = max_excess.max(excess);
        if excess > EPSILON_QUAD {
            violations += 1;
        }
    }
    Ok(Theorem2Record {
        n_functions,
        violations,
        max_excess,
    })
}

/// Weight of the false-negative risk at `x` relative to false positives.
pub fn positive_weight(costs: &CostStructure, region: &KnowledgeRegion, x: &[f64]) -> f64 {
    weight_for(costs, region.contains_unchecked(x), Label::Positive)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::input(format!("unknown report format {other:?}"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 13] = [
    "variant", "m", "rep", "seed", "C", "gap", "utility", "u_fq", "emp_error", "norm", "norm_bound",
    "theory_bound", "converged",
];

/// Writes the report as CSV (fixed columns) or pretty JSON.
pub fn write_report<W: Write>(report: &ExperimentReport, format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let err = |e: csv::Error| Error::Format(format!("writing report: {e}"));
            w.write_record(CSV_COLUMNS).map_err(err)?;
            for r in &report.rows {
                w.write_record([
                    r.variant.clone(),
                    r.m.to_string(),
                    r.rep.to_string(),
                    r.seed.to_string(),
                    r.trade_off.to_string(),
                    r.gap.to_string(),
                    r.utility.to_string(),
                    r.u_fq.to_string(),
                    r.emp_error.to_string(),
                    r.norm.to_string(),
                    r.norm_bound.to_string(),
                    r.theory_bound.to_string(),
                    r.converged.to_string(),
                ])
                .map_err(err)?;
            }
            w.flush().map_err(|e| Error::Format(format!("writing report: {e}")))?;
        }
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)
                .map_err(|e| Error::Format(format!("writing report: {e}")))?;
            writeln!(out).map_err(|e| Error::Format(format!("writing report: {e}")))?;
        }
    }
    Ok(())
}

pub fn report_to_string(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    let mut buf = Vec::new();
    write_report(report, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("report output is UTF-8"))
}

pub fn emit_report(report: &ExperimentReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_report(report, format, std::io::BufWriter::new(file))
}

pub fn report_from_json(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("report: {e}")))
}
