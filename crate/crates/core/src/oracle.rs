//! Ground truth for synthetic problems: distributions with a closed-form
//! conditional `η(x) = Pr(Y = 1 | X = x)`, the utility-optimal classifier,
//! exact (quadrature) and plug-in evaluation of utility and generalization
//! error, and the sample-error bound calculator.

use std::path::Path;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as NormalDist};

use crate::dataset::{Dataset, Label};
use crate::domain::BoxDomain;
use crate::error::{ensure_finite, Error, Result};
use crate::knowledge::{hinge, weight_for, CostStructure, KnowledgeRegion};
use crate::par::{self, pairwise_sum};
use crate::quadrature::tensor_rule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Per-axis standard deviations (diagonal covariance).
    pub std: Vec<f64>,
}

/// Marginal distribution of `X` on the domain box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Uniform,
    /// Diagonal Gaussian mixture conditioned on the box.
    GaussianMixture { components: Vec<MixtureComponent> },
}

/// Closed-form conditional positive probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaSpec {
    Constant { value: f64 },
    /// `1 / (1 + exp(−(w·x + b)))`.
    Logistic { w: Vec<f64>, b: f64 },
    /// `w·x + b`; must stay inside [0, 1] on the box.
    Affine { w: Vec<f64>, b: f64 },
    /// Constant on the cells of a tensor grid. `breaks[k]` are the ascending
    /// interior cut points of axis `k`; `values` is row-major over cells with
    /// the last axis fastest. A point on a cut belongs to the upper cell.
    PiecewiseConstant { breaks: Vec<Vec<f64>>, values: Vec<f64> },
}

impl EtaSpec {
    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            EtaSpec::Constant { value } => *value,
            EtaSpec::Logistic { w, b } => {
                let t: f64 = w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b;
                1.0 / (1.0 + (-t).exp())
            }
            EtaSpec::Affine { w, b } => w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b,
            EtaSpec::PiecewiseConstant { breaks, values } => {
                let mut idx = 0;
                for (k, cuts) in breaks.iter().enumerate() {
                    let cell = cuts.partition_point(|c| *c <= x[k]);
                    idx = idx * (cuts.len() + 1) + cell;
                }
                values[idx]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDistribution {
    pub marginal: Marginal,
    pub eta: EtaSpec,
    #[serde(rename = "box")]
    pub domain: BoxDomain,
}

impl SyntheticDistribution {
    pub fn new(marginal: Marginal, eta: EtaSpec, domain: BoxDomain) -> Result<Self> {
        let d = SyntheticDistribution {
            marginal,
            eta,
            domain,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if !self.domain.is_bounded() {
            return Err(Error::input("distribution box must be bounded"));
        }
        let n = self.dim();
        match &self.marginal {
            Marginal::Uniform => {
                if self.domain.volume() <= 0.0 {
                    return Err(Error::input("uniform marginal needs a box of positive volume"));
                }
            }
            Marginal::GaussianMixture { components } => {
                if components.is_empty() {
                    return Err(Error::input("mixture needs at least one component"));
                }
                for (k, c) in components.iter().enumerate() {
                    if c.mean.len() != n || c.std.len() != n {
                        return Err(Error::input(format!("mixture component {k} has wrong dimension")));
                    }
                    ensure_finite(&c.mean, "mixture mean")?;
                    if !(c.weight > 0.0 && c.weight.is_finite()) || c.std.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                        return Err(Error::input(format!(
                            "mixture component {k} needs positive weight and std"
                        )));
                    }
                }
                if self.mixture_mass() < 1e-12 {
                    return Err(Error::input("mixture places (almost) no mass inside the box"));
                }
            }
        }
        match &self.eta {
            EtaSpec::Constant { value } => {
                if !(0.0..=1.0).contains(value) {
                    return Err(Error::input(format!("constant eta {value} outside [0, 1]")));
                }
            }
            EtaSpec::Logistic { w, b } => {
                if w.len() != n {
                    return Err(Error::input("logistic eta weight has wrong dimension"));
                }
                ensure_finite(w, "logistic weights")?;
                ensure_finite(&[*b], "logistic offset")?;
            }
            EtaSpec::Affine { w, b } => {
                if w.len() != n {
                    return Err(Error::input("affine eta weight has wrong dimension"));
                }
                ensure_finite(w, "affine weights")?;
                let (mut lo, mut hi) = (*b, *b);
                for (k, a) in w.iter().enumerate() {
                    let (p, q) = (a * self.domain.lower[k], a * self.domain.upper[k]);
                    lo += p.min(q);
                    hi += p.max(q);
                }
                if lo < 0.0 || hi > 1.0 {
                    return Err(Error::input(format!(
                        "affine eta ranges over [{lo}, {hi}] on the box, outside [0, 1]"
                    )));
                }
            }
            EtaSpec::PiecewiseConstant { breaks, values } => {
                if breaks.len() != n {
                    return Err(Error::input("piecewise eta needs one break list per axis"));
                }
                for cuts in breaks {
                    ensure_finite(cuts, "piecewise breaks")?;
                    if cuts.windows(2).any(|p| p[0] >= p[1]) {
                        return Err(Error::input("piecewise breaks must be strictly ascending"));
                    }
                }
                let cells: usize = breaks.iter().map(|c| c.len() + 1).product();
                if values.len() != cells {
                    return Err(Error::input(format!(
                        "piecewise eta has {} values for {cells} cells",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::input("piecewise eta values must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    fn normalized_components(&self) -> Vec<(f64, &MixtureComponent)> {
        match &self.marginal {
            Marginal::GaussianMixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                components.iter().map(|c| (c.weight / total, c)).collect()
            }
            Marginal::Uniform => Vec::new(),
        }
    }

    /// Probability the untruncated mixture assigns to the box.
    fn mixture_mass(&self) -> f64 {
        self.normalized_components()
            .iter()
            .map(|(w, c)| {
                w * (0..self.dim())
                    .map(|k| {
                        let nd = NormalDist::new(c.mean[k], c.std[k]).expect("validated std");
                        nd.cdf(self.domain.upper[k]) - nd.cdf(self.domain.lower[k])
                    })
                    .product::<f64>()
            })
            .sum()
    }

    /// Marginal density `ρ_X(x)` on the box (zero outside).
    pub fn density(&self, x: &[f64]) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        match &self.marginal {
            Marginal::Uniform => 1.0 / self.domain.volume(),
            Marginal::GaussianMixture { .. } => {
                let raw: f64 = self
                    .normalized_components()
                    .iter()
                    .map(|(w, c)| {
                        w * (0..self.dim())
                            .map(|k| {
                                NormalDist::new(c.mean[k], c.std[k])
                                    .expect("validated std")
                                    .pdf(x[k])
                            })
                            .product::<f64>()
                    })
                    .sum();
                raw / self.mixture_mass()
            }
        }
    }

    /// `η(x)` without the domain check.
    #[inline]
    pub fn eta_unchecked(&self, x: &[f64]) -> f64 {
        self.eta.eval(x)
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng, picker: Option<&WeightedIndex<f64>>) -> Result<Vec<f64>> {
        let n = self.dim();
        match &self.marginal {
            Marginal::Uniform => Ok((0..n)
                .map(|k| {
                    let u: f64 = rng.random();
                    self.domain.lower[k] + (self.domain.upper[k] - self.domain.lower[k]) * u
                })
                .collect()),
            Marginal::GaussianMixture { components } => {
                let picker = picker.expect("mixture sampler needs a component picker");
                for _ in 0..1_000_000 {
                    let c = &components[picker.sample(rng)];
                    let x: Vec<f64> = (0..n)
                        .map(|k| Normal::new(c.mean[k], c.std[k]).expect("validated std").sample(rng))
                        .collect();
                    if self.domain.contains(&x) {
                        return Ok(x);
                    }
                }
                Err(Error::Numeric("rejection sampling into the box did not terminate".into()))
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: SyntheticDistribution =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("distribution config: {e}")))?;
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// `η(x)`; `x` must lie in the domain box.
pub fn eta(dist: &SyntheticDistribution, x: &[f64]) -> Result<f64> {
    ensure_finite(x, "x")?;
    if !dist.domain.contains(x) {
        return Err(Error::input(format!("point {x:?} is outside the distribution box")));
    }
    Ok(dist.eta_unchecked(x))
}

/// Draws `m` i.i.d. pairs. Deterministic in `seed`.
pub fn sample_dataset(dist: &SyntheticDistribution, m: usize, seed: u64) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::input("sample size must be at least 1"));
    }
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picker = match &dist.marginal {
        Marginal::GaussianMixture { components } => Some(
            WeightedIndex::new(components.iter().map(|c| c.weight))
                .map_err(|e| Error::input(format!("mixture weights: {e}")))?,
        ),
        Marginal::Uniform => None,
    };
    let mut features = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let x = dist.sample_point(&mut rng, picker.as_ref())?;
        let u: f64 = rng.random();
        labels.push(if u < dist.eta_unchecked(&x) {
            Label::Positive
        } else {
            Label::Negative
        });
        features.push(x);
    }
    Dataset::new(features, labels)
}

/// Utility-optimal decision given `η` and the positive-risk weight `w(x)`:
/// `+1` iff `w·η ≥ 1 − η`.
#[inline]
pub fn fq_decision(eta: f64, weight_pos: f64) -> Label {
    if weight_pos * eta >= 1.0 - eta {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// The classifier maximizing the utility at `x`.
pub fn optimal_classifier_fq(
    dist: &SyntheticDistribution,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    x: &[f64],
) -> Result<Label> {
    let e = eta(dist, x)?;
    let inside = crate::knowledge::region_membership(region, x)?;
    Ok(fq_decision(e, weight_for(costs, inside, Label::Positive)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseMinimum {
    pub argmin_w: f64,
    pub min_value: f64,
}

/// Exhaustive grid minimization over `w ∈ [−1, 1]` of
/// `G(w) = weight_pos·η·(margin − w)₊ + weight_neg·(1 − η)·(margin + w)₊`.
/// Among (numerically) tied minima the largest `w` wins.
pub fn pointwise_minimizer(
    eta_value: f64,
    weight_pos: f64,
    weight_neg: f64,
    margin: f64,
    grid_steps: usize,
) -> Result<PointwiseMinimum> {
    if !(0.0..=1.0).contains(&eta_value) {
        return Err(Error::input(format!("eta {eta_value} outside [0, 1]")));
    }
    if !(weight_pos > 0.0 && weight_neg > 0.0) {
        return Err(Error::input("weights must be positive"));
    }
    if !(margin >= 1.0 && margin.is_finite()) {
        return Err(Error::input(format!("margin must be >= 1, got {margin}")));
    }
    if grid_steps < 1000 {
        return Err(Error::input("grid_steps must be at least 1000"));
    }
    let g = |w: f64| {
        weight_pos * eta_value * hinge(margin, w) + weight_neg * (1.0 - eta_value) * hinge(margin, -w)
    };
    let values: Vec<(f64, f64)> = (0..=grid_steps)
        .map(|k| {
            let w = -1.0 + 2.0 * k as f64 / grid_steps as f64;
            (w, g(w))
        })
        .collect();
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + min.abs());
    let &(argmin_w, _) = values
        .iter()
        .rev()
        .find(|v| v.1 <= min + tol)
        .expect("grid is non-empty");
    Ok(PointwiseMinimum {
        argmin_w,
        min_value: min,
    })
}

/// Integration settings. Boxes of dimension ≤ 3 use tensor Gauss–Legendre;
/// higher dimensions fall back to seeded Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    #[serde(default = "one")]
    pub panels_per_axis: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub mc_seed: u64,
}

fn one() -> usize {
    1
}

fn default_mc_samples() -> usize {
    200_000
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes_per_axis: 64,
            panels_per_axis: 1,
            mc_samples: default_mc_samples(),
            mc_seed: 0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 2 {
            return Err(Error::input("nodes_per_axis must be at least 2"));
        }
        if self.panels_per_axis < 1 || self.mc_samples < 2 {
            return Err(Error::input("panels_per_axis and mc_samples must be positive"));
        }
        Ok(())
    }
}

/// Largest dimension integrated by tensor quadrature.
pub const MAX_QUADRATURE_DIM: usize = 3;

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.5758293035489004;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EvaluationMode {
    Quadrature,
    MonteCarlo { ci_half_width: f64 },
}

/// Discretized expectation over `ρ_X`: `E[g(X)] ≈ Σ weightᵢ g(nodeᵢ)`.
/// Caches `η` at the nodes so many classifiers can be scored cheaply.
#[derive(Debug, Clone)]
pub struct ExpectationRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub eta: Vec<f64>,
    monte_carlo: bool,
}

impl ExpectationRule {
    pub fn new(dist: &SyntheticDistribution, quad: &QuadratureSpec) -> Result<Self> {
        dist.validate()?;
        quad.validate()?;
        let (nodes, weights) = if dist.dim() <= MAX_QUADRATURE_DIM {
            let (nodes, lebesgue) = tensor_rule(&dist.domain, quad.nodes_per_axis, quad.panels_per_axis);
            let weights = nodes.iter().zip(lebesgue).map(|(x, w)| w * dist.density(x)).collect();
            (nodes, weights)
        } else {
            let sample = sample_dataset(dist, quad.mc_samples, quad.mc_seed)?;
            let w = 1.0 / quad.mc_samples as f64;
            (sample.features, vec![w; quad.mc_samples])
        };
        let eta = nodes.iter().map(|x| dist.eta_unchecked(x)).collect();
        Ok(ExpectationRule {
            nodes,
            weights,
            eta,
            monte_carlo: dist.dim() > MAX_QUADRATURE_DIM,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_monte_carlo(&self) -> bool {
        self.monte_carlo
    }

    /// Weighted sum of per-node values, with a 99% CI half-width in Monte
    /// Carlo mode.
    pub fn integrate(&self, values: &[f64]) -> (f64, EvaluationMode) {
        let terms: Vec<f64> = values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        let mean = pairwise_sum(&terms);
        if !self.monte_carlo {
            return (mean, EvaluationMode::Quadrature);
        }
        let n = values.len() as f64;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1.0);
        (
            mean,
            EvaluationMode::MonteCarlo {
                ci_half_width: Z99 * (var / n).sqrt(),
            },
        )
    }

    /// Evaluates `f` at every node, in parallel when enabled.
    pub fn evaluate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        par::map_slice(&self.nodes, |x| f(x))
    }

    fn membership(&self, region: &KnowledgeRegion) -> Vec<bool> {
        self.nodes.iter().map(|x| region.contains_unchecked(x)).collect()
    }

    /// Utility report for a classifier given by its ±1 values at the nodes.
    pub fn utility_from_labels(
        &self,
        costs: &CostStructure,
        region: &KnowledgeRegion,
        labels: &[f64],
    ) -> Result<UtilityReport> {
        if labels.len() != self.len() {
            return Err(Error::input("label count does not match node count"));
        }
        if let Some(v) = labels.iter().find(|v| **v != 1.0 && **v != -1.0) {
            return Err(Error::Contract(format!("classifier returned {v}, expected -1 or +1")));
        }
        let inside = self.membership(region);
        let mut u = Vec::with_capacity(self.len());
        let mut u_opt = Vec::with_capacity(self.len());
        let mut cost = Vec::with_capacity(self.len());
        let mut miss = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let e = self.eta[i];
            let w = weight_for(costs, inside[i], Label::Positive);
            let (fp, fnr) = (1.0 - e, w * e);
            let positive = labels[i] == 1.0;
            u.push(-if positive { fp } else { fnr });
            u_opt.push(-if fq_decision(e, w).is_positive() { fp } else { fnr });
            cost.push(if positive { costs.c_plus * (1.0 - e) } else { costs.c_minus * e });
            miss.push(if positive { 1.0 - e } else { e });
        }
        let (utility, mode) = self.integrate(&u);
        let (u_fq, _) = self.integrate(&u_opt);
        Ok(UtilityReport {
            utility,
            expected_cost: self.integrate(&cost).0,
            misclassification_error: self.integrate(&miss).0,
            utility_gap: u_fq - utility,
            optimal_utility: u_fq,
            mode,
        })
    }

    /// Labels of `f_q` at every node.
    pub fn fq_labels(&self, costs: &CostStructure, region: &KnowledgeRegion) -> Vec<f64> {
        self.membership(region)
            .iter()
            .zip(&self.eta)
            .map(|(&inside, &e)| fq_decision(e, weight_for(costs, inside, Label::Positive)).sign())
            .collect()
    }

    /// Generalization error of a real-valued `f` given by its node values.
    pub fn generalization_error_from_values(
        &self,
        costs: &CostStructure,
        region: &KnowledgeRegion,
        values: &[f64],
    ) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::input("value count does not match node count"));
        }
        ensure_finite(values, "f values")?;
        let inside = self.membership(region);
        let terms: Vec<f64> = (0..self.len())
            .map(|i| {
                let e = self.eta[i];
                let wp = weight_for(costs, inside[i], Label::Positive);
                let wn = weight_for(costs, inside[i], Label::Negative);
                wp * e * hinge(1.0, values[i]) + wn * (1.0 - e) * hinge(1.0, -values[i])
            })
            .collect();
        Ok(self.integrate(&terms).0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub utility: f64,
    /// `E[c⁺(1−η)1{f=+1} + c⁻η1{f=−1}]`.
    pub expected_cost: f64,
    pub misclassification_error: f64,
    /// `U(f_q) − U(f)`.
    pub utility_gap: f64,
    /// `U(f_q)` under the same rule.
    pub optimal_utility: f64,
    pub mode: EvaluationMode,
}

/// Utility of a ±1-valued classifier, integrated over the distribution.
pub fn utility<F>(
    dist: &SyntheticDistribution,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    classifier: F,
    quad: &QuadratureSpec,
) -> Result<UtilityReport>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    check_setting(dist, costs, region)?;
    let rule = ExpectationRule::new(dist, quad)?;
    let labels = rule.evaluate(classifier);
    rule.utility_from_labels(costs, region, &labels)
}

/// `E[V(Y, f(X))]` for the weighted hinge loss.
pub fn generalization_error<F>(
    dist: &SyntheticDistribution,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    f: F,
    quad: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    check_setting(dist, costs, region)?;
    let rule = ExpectationRule::new(dist, quad)?;
    let values = rule.evaluate(f);
    rule.generalization_error_from_values(costs, region, &values)
}

fn check_setting(dist: &SyntheticDistribution, costs: &CostStructure, region: &KnowledgeRegion) -> Result<()> {
    costs.validate()?;
    region.validate()?;
    if let Some(n) = region.dim() {
        if n != dist.dim() {
            return Err(Error::input("region dimension does not match distribution dimension"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Plug-in utility `−(1/m) Σ [1{y=−1, f=+1} + w(x)·1{y=+1, f=−1}]` with its
/// standard error.
pub fn empirical_utility_estimate<F>(
    test_set: &Dataset,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    classifier: F,
) -> Result<EmpiricalEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if test_set.is_empty() {
        return Err(Error::input("test set is empty"));
    }
    costs.validate()?;
    region.validate()?;
    let preds = par::map_slice(&test_set.features, |x| classifier(x));
    let mut terms = Vec::with_capacity(test_set.len());
    for ((x, y), p) in test_set.features.iter().zip(&test_set.labels).zip(&preds) {
        if *p != 1.0 && *p != -1.0 {
            return Err(Error::Contract(format!("classifier returned {p}, expected -1 or +1")));
        }
        let risk = match (y, *p == 1.0) {
            (Label::Negative, true) => 1.0,
            (Label::Positive, false) => weight_for(costs, region.contains_unchecked(x), Label::Positive),
            _ => 0.0,
        };
        terms.push(-risk);
    }
    let n = terms.len() as f64;
    let mean = pairwise_sum(&terms) / n;
    let var = if terms.len() > 1 {
        pairwise_sum(&terms.iter().map(|t| (t - mean) * (t - mean)).collect::<Vec<_>>()) / (n - 1.0)
    } else {
        0.0
    };
    Ok(EmpiricalEstimate {
        mean,
        std_error: (var / n).sqrt(),
    })
}

pub fn empirical_utility<F>(
    test_set: &Dataset,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    classifier: F,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    Ok(empirical_utility_estimate(test_set, costs, region, classifier)?.mean)
}

/// Sample mean of the weighted hinge loss, `E_z(f)`.
pub fn empirical_error<F>(
    dataset: &Dataset,
    costs: &CostStructure,
    region: &KnowledgeRegion,
    f: F,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if dataset.is_empty() {
        return Err(Error::input("dataset is empty"));
    }
    costs.validate()?;
    region.validate()?;
    let values = par::map_slice(&dataset.features, |x| f(x));
    let mut losses = Vec::with_capacity(dataset.len());
    for ((x, y), v) in dataset.features.iter().zip(&dataset.labels).zip(values) {
        if !v.is_finite() {
            return Err(Error::input("f returned a non-finite value"));
        }
        let w = weight_for(costs, region.contains_unchecked(x), *y);
        losses.push(w * hinge(1.0, y.sign() * v));
    }
    Ok(pairwise_sum(&losses) / dataset.len() as f64)
}

/// Counts of in-region positives (`m1`) and everything else (`m2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMix {
    pub m1: usize,
    pub m2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleErrorBound {
    pub epsilon_rad: f64,
    pub rad_term: f64,
    pub epsilon_hoeff: f64,
    pub total: f64,
    pub beta: f64,
    pub m_tilde: f64,
    /// Sup of the loss at the regularized population minimizer,
    /// `β(1 + κ√(2βC))`.
    pub m_bar: f64,
    pub radius: f64,
}

/// Confidence-`1 − δ` sample-error bound terms:
/// `ε_rad = (1 + κR)β√(ln(2/δ)/m)`, `rad_term = 2κRβ/√m` with `R = √(2CM̃)`,
/// `ε_hoeff = M̄√(2 ln(2/δ)/m)`. `M̃` uses the mix proportions.
pub fn sample_error_bound(
    m: usize,
    trade_off: f64,
    delta: f64,
    costs: &CostStructure,
    mix: SampleMix,
    kappa: f64,
) -> Result<SampleErrorBound> {
    if m == 0 {
        return Err(Error::input("m must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::input(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(trade_off > 0.0 && trade_off.is_finite()) || !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::input("C and kappa must be positive"));
    }
    costs.validate()?;
    if mix.m1 + mix.m2 == 0 {
        return Err(Error::input("sample mix is empty"));
    }
    let mf = m as f64;
    let beta = costs.beta();
    let m_tilde = costs.weight_other() * (costs.c_hat * mix.m1 as f64 + mix.m2 as f64)
        / (mix.m1 + mix.m2) as f64;
    let radius = (2.0 * trade_off * m_tilde).sqrt();
    let log_term = (2.0 / delta).ln();
    let epsilon_rad = (1.0 + kappa * radius) * beta * (log_term / mf).sqrt();
    let rad_term = 2.0 * kappa * radius * beta / mf.sqrt();
    let m_bar = beta * (1.0 + kappa * (2.0 * beta * trade_off).sqrt());
    let epsilon_hoeff = m_bar * (2.0 * log_term / mf).sqrt();
    Ok(SampleErrorBound {
        epsilon_rad,
        rad_term,
        epsilon_hoeff,
        total: epsilon_rad + rad_term + epsilon_hoeff,
        beta,
        m_tilde,
        m_bar,
        radius,
    })
}
