use serde::{Deserialize, Serialize};

use crate::error::{ensure_same_dim, Error, Result};

/// Axis-aligned box `[lower_k, upper_k]` in ℝⁿ. Bounds may be infinite only
/// where a caller explicitly tolerates it (see [`crate::kernel::kernel_sup`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = BoxDomain { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn unit(dim: usize) -> Self {
        BoxDomain {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_same_dim(&self.lower, &self.upper)?;
        if self.lower.is_empty() {
            return Err(Error::input("box must have at least one dimension"));
        }
        for (k, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(Error::input(format!(
                    "box axis {k}: need lower <= upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.lower
            .iter()
            .chain(&self.upper)
            .all(|v| v.is_finite())
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// Tensor grid with `counts[k]` equally spaced points per axis, endpoints
    /// included. A count of one places the point at the axis midpoint.
    pub fn grid(&self, counts: &[usize]) -> Result<Vec<Vec<f64>>> {
        if counts.len() != self.dim() {
            return Err(Error::input(format!(
                "grid has {} axis counts for a {}-dimensional box",
                counts.len(),
                self.dim()
            )));
        }
        if counts.contains(&0) {
            return Err(Error::input("grid counts must be positive"));
        }
        if !self.is_bounded() {
            return Err(Error::input("grid box must be bounded"));
        }
        let axes: Vec<Vec<f64>> = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let (l, u) = (self.lower[k], self.upper[k]);
                if c == 1 {
                    vec![0.5 * (l + u)]
                } else {
                    (0..c)
                        .map(|i| l + (u - l) * i as f64 / (c - 1) as f64)
                        .collect()
                }
            })
            .collect();
        Ok(tensor_product(&axes))
    }
}

/// Cartesian product of per-axis coordinate lists; the last axis varies fastest.
pub(crate) fn tensor_product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        out.push(idx.iter().enumerate().map(|(k, &i)| axes[k][i]).collect());
        for k in (0..axes.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}
