//! Knowledge regions `A₊ = {x : g⁺(x) ≤ 0}`, misclassification costs and the
//! region- and label-weighted hinge loss built from them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{ensure_finite, ensure_same_dim, Error, Result};

/// Region predicate. Membership is decided by the sign of `g⁺(x)` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KnowledgeRegion {
    /// `g⁺(x) = a·x + b`.
    Halfspace { a: Vec<f64>, b: f64 },
    /// `g⁺(x) = ‖x - center‖ - radius`.
    Ball { center: Vec<f64>, radius: f64 },
    /// `g⁺(x) = max_k max(lower_k - x_k, x_k - upper_k)`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `g⁺ ≡ 1`.
    Empty,
}

impl KnowledgeRegion {
    pub fn validate(&self) -> Result<()> {
        match self {
            KnowledgeRegion::Halfspace { a, b } => {
                ensure_finite(a, "halfspace normal")?;
                ensure_finite(&[*b], "halfspace offset")?;
                if a.is_empty() {
                    return Err(Error::input("halfspace normal must be non-empty"));
                }
            }
            KnowledgeRegion::Ball { center, radius } => {
                ensure_finite(center, "ball center")?;
                if center.is_empty() {
                    return Err(Error::input("ball center must be non-empty"));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::input(format!("ball radius must be positive, got {radius}")));
                }
            }
            KnowledgeRegion::Box { lower, upper } => {
                ensure_same_dim(lower, upper)?;
                if lower.is_empty() {
                    return Err(Error::input("region box must be non-empty"));
                }
                for (k, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if l.is_nan() || u.is_nan() || l > u {
                        return Err(Error::input(format!(
                            "region box axis {k}: need lower <= upper, got [{l}, {u}]"
                        )));
                    }
                }
            }
            KnowledgeRegion::Empty => {}
        }
        Ok(())
    }

    /// Dimension the predicate expects, or `None` for the empty region.
    pub fn dim(&self) -> Option<usize> {
        match self {
            KnowledgeRegion::Halfspace { a, .. } => Some(a.len()),
            KnowledgeRegion::Ball { center, .. } => Some(center.len()),
            KnowledgeRegion::Box { lower, .. } => Some(lower.len()),
            KnowledgeRegion::Empty => None,
        }
    }

    pub fn is_empty_region(&self) -> bool {
        matches!(self, KnowledgeRegion::Empty)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        match self.dim() {
            Some(n) if n != x.len() => Err(Error::input(format!(
                "region expects dimension {n}, point has {}",
                x.len()
            ))),
            _ => Ok(()),
        }
    }

    /// `g⁺(x)`.
    pub fn g(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.g_unchecked(x))
    }

    #[inline]
    pub(crate) fn g_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            KnowledgeRegion::Halfspace { a, b } => {
                a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + b
            }
            KnowledgeRegion::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum();
                d2.sqrt() - radius
            }
            KnowledgeRegion::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .zip(x)
                .map(|((l, u), v)| (l - v).max(v - u))
                .fold(f64::NEG_INFINITY, f64::max),
            KnowledgeRegion::Empty => 1.0,
        }
    }

    #[inline]
    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        self.g_unchecked(x) <= 0.0
    }
}

/// Member iff `g⁺(x) ≤ 0`; boundary points are members.
pub fn region_membership(region: &KnowledgeRegion, x: &[f64]) -> Result<bool> {
    Ok(region.g(x)? <= 0.0)
}

/// `χ(g⁺(x))`: −1 inside the region, +1 outside.
pub fn chi_indicator(region: &KnowledgeRegion, x: &[f64]) -> Result<i8> {
    Ok(if region_membership(region, x)? { -1 } else { 1 })
}

/// False-positive cost `c⁺`, false-negative cost `c⁻` and the extra
/// false-negative multiplier `ĉ` inside the knowledge region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostStructure {
    pub c_plus: f64,
    pub c_minus: f64,
    pub c_hat: f64,
}

impl Default for CostStructure {
    fn default() -> Self {
        CostStructure::unit()
    }
}

impl CostStructure {
    pub fn new(c_plus: f64, c_minus: f64, c_hat: f64) -> Result<Self> {
        let c = CostStructure {
            c_plus,
            c_minus,
            c_hat,
        };
        c.validate()?;
        Ok(c)
    }

    /// `c⁺ = c⁻ = ĉ = 1`: the plain hinge loss.
    pub const fn unit() -> Self {
        CostStructure {
            c_plus: 1.0,
            c_minus: 1.0,
            c_hat: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_plus", self.c_plus),
            ("c_minus", self.c_minus),
            ("c_hat", self.c_hat),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `β = c⁻ĉ/c⁺`, the in-region positive weight.
    pub fn beta(&self) -> f64 {
        self.c_minus * self.c_hat / self.c_plus
    }

    pub fn weight_in_region_positive(&self) -> f64 {
        self.beta()
    }

    /// `c⁻/c⁺`, the weight of every other case.
    pub fn weight_other(&self) -> f64 {
        self.c_minus / self.c_plus
    }

    /// The same costs with `ĉ` reset to one.
    pub fn without_region(&self) -> Self {
        CostStructure {
            c_hat: 1.0,
            ..*self
        }
    }
}

/// Per-sample loss weight, case form.
pub fn sample_weight(
    costs: &CostStructure,
    region: &KnowledgeRegion,
    x: &[f64],
    y: Label,
) -> Result<f64> {
    let inside = region_membership(region, x)?;
    Ok(weight_for(costs, inside, y))
}

#[inline]
pub(crate) fn weight_for(costs: &CostStructure, inside: bool, y: Label) -> f64 {
    if inside && y.is_positive() {
        costs.c_minus * costs.c_hat / costs.c_plus
    } else {
        costs.c_minus / costs.c_plus
    }
}

/// Per-sample weight through the χ closed form
/// `(c⁻/c⁺)·(1 + [1 − χ(g⁺(x))](y + 1)(ĉ − 1)/4)`.
pub fn sample_weight_closed_form(
    costs: &CostStructure,
    region: &KnowledgeRegion,
    x: &[f64],
    y: Label,
) -> Result<f64> {
    let chi = f64::from(chi_indicator(region, x)?);
    let yv = y.sign();
    Ok(costs.c_minus / costs.c_plus * (1.0 + (1.0 - chi) * (yv + 1.0) * (costs.c_hat - 1.0) / 4.0))
}

#[inline]
pub(crate) fn hinge(margin: f64, yf: f64) -> f64 {
    (margin - yf).max(0.0)
}

/// Weighted hinge `weight · max(0, 1 − y·f)`.
pub fn piecewise_loss(
    costs: &CostStructure,
    region: &KnowledgeRegion,
    x: &[f64],
    y: Label,
    f_value: f64,
) -> Result<f64> {
    if !f_value.is_finite() {
        return Err(Error::input(format!("f value must be finite, got {f_value}")));
    }
    Ok(sample_weight(costs, region, x, y)? * hinge(1.0, y.sign() * f_value))
}

/// Region plus costs, as read from a knowledge configuration file:
/// `{"region": {"kind": "ball", ...}, "costs": {"c_plus": .., "c_minus": .., "c_hat": ..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeConfig {
    pub region: KnowledgeRegion,
    pub costs: CostStructure,
}

impl KnowledgeConfig {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        self.costs.validate()?;
        if self.costs.c_hat <= 1.0 && !self.region.is_empty_region() {
            log::warn!(
                "c_hat = {} <= 1 with a non-empty knowledge region: in-region positives are not up-weighted",
                self.costs.c_hat
            );
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: KnowledgeConfig =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("knowledge config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
