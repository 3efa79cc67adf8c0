//! Mercer kernels, Gram matrices and kernel expansions in the induced RKHS.

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::domain::BoxDomain;
use crate::error::{ensure_finite, ensure_same_dim, Error, Result};
use crate::par;

/// Kernel family and its parameters.
///
/// Serialized as `{"kind": "gaussian", "params": {"sigma": 0.5}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(-‖x - y‖² / σ²)`.
    Gaussian { sigma: f64 },
    /// `⟨x, y⟩`.
    Linear,
    /// `(⟨x, y⟩ + offset)^degree`.
    Polynomial { degree: u32, offset: f64 },
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let k = KernelSpec::Gaussian { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::input(format!("gaussian sigma must be positive, got {sigma}")))
            }
            KernelSpec::Polynomial { degree, .. } if degree < 1 => {
                Err(Error::input("polynomial degree must be at least 1"))
            }
            // negative offsets break positive semidefiniteness
            KernelSpec::Polynomial { offset, .. } if !(offset >= 0.0 && offset.is_finite()) => {
                Err(Error::input(format!(
                    "polynomial offset must be finite and non-negative, got {offset}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Kernel value without input checks. Callers guarantee equal dimensions.
    #[inline]
    pub(crate) fn apply(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (sigma * sigma)).exp()
            }
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { degree, offset } => (dot(x, y) + offset).powi(degree as i32),
        }
    }
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn eval_kernel(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    spec.validate()?;
    ensure_same_dim(x, x2)?;
    if x.is_empty() {
        return Err(Error::input("feature vectors must have dimension >= 1"));
    }
    ensure_finite(x, "x")?;
    ensure_finite(x2, "x2")?;
    Ok(spec.apply(x, x2))
}

/// Dense symmetric kernel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Vec<f64>,
    point_count: usize,
}

impl GramMatrix {
    pub fn point_count(&self) -> usize {
        self.point_count
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.point_count + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.point_count;
        &self.entries[i * m..(i + 1) * m]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.point_count).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Eigenvalue tolerance used for positive-semidefiniteness checks.
    pub fn psd_tolerance(&self) -> f64 {
        1e-8 * self.trace().abs()
    }
}

pub(crate) fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::input("point list is empty"))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::input("feature vectors must have dimension >= 1"));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(Error::input(format!(
                "ragged points: point {i} has dimension {}, expected {n}",
                p.len()
            )));
        }
        ensure_finite(p, &format!("point {i}"))?;
    }
    Ok(n)
}

/// Builds the Gram matrix. Rows may be filled in parallel; each entry is a
/// single kernel evaluation, so the result does not depend on scheduling.
pub fn gram_matrix(spec: &KernelSpec, points: &[Vec<f64>]) -> Result<GramMatrix> {
    spec.validate()?;
    check_points(points)?;
    Ok(gram_unchecked(spec, points))
}

pub(crate) fn gram_unchecked(spec: &KernelSpec, points: &[Vec<f64>]) -> GramMatrix {
    let m = points.len();
    let mut entries = vec![0.0; m * m];
    if m > 0 {
        par::for_each_chunk_mut(&mut entries, m, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = spec.apply(&points[i], &points[j]);
            }
        });
    }
    GramMatrix {
        entries,
        point_count: m,
    }
}

/// `f(x) = Σᵢ αᵢ yᵢ K(xᵢ, x)`; the empty expansion is the zero function.
pub fn eval_expansion(
    coefficients: &[f64],
    labels: &[Label],
    support_points: &[Vec<f64>],
    spec: &KernelSpec,
    x: &[f64],
) -> Result<f64> {
    if coefficients.len() != labels.len() || labels.len() != support_points.len() {
        return Err(Error::input(format!(
            "expansion length mismatch: {} coefficients, {} labels, {} points",
            coefficients.len(),
            labels.len(),
            support_points.len()
        )));
    }
    spec.validate()?;
    ensure_finite(x, "x")?;
    for p in support_points {
        ensure_same_dim(p, x)?;
    }
    Ok(expansion_unchecked(coefficients, labels, support_points, spec, x))
}

#[inline]
pub(crate) fn expansion_unchecked(
    coefficients: &[f64],
    labels: &[Label],
    support_points: &[Vec<f64>],
    spec: &KernelSpec,
    x: &[f64],
) -> f64 {
    coefficients
        .iter()
        .zip(labels)
        .zip(support_points)
        .filter(|((a, _), _)| **a != 0.0)
        .map(|((a, y), p)| a * y.sign() * spec.apply(p, x))
        .sum()
}

/// A compact kernel expansion `f(x) = Σ_j c_j K(p_j, x)` with signed
/// coefficients, used for fast repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub kernel: KernelSpec,
    pub coefficients: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
}

impl Expansion {
    pub fn new(kernel: KernelSpec, coefficients: Vec<f64>, centers: Vec<Vec<f64>>) -> Result<Self> {
        kernel.validate()?;
        if coefficients.len() != centers.len() {
            return Err(Error::input("expansion coefficient/center count mismatch"));
        }
        ensure_finite(&coefficients, "expansion coefficients")?;
        if !centers.is_empty() {
            check_points(&centers)?;
        }
        Ok(Expansion {
            kernel,
            coefficients,
            centers,
        })
    }

    pub fn zero(kernel: KernelSpec) -> Self {
        Expansion {
            kernel,
            coefficients: Vec::new(),
            centers: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Evaluates without dimension checks.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.centers)
            .map(|(c, p)| c * self.kernel.apply(p, x))
            .sum()
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64> {
        ensure_finite(x, "x")?;
        if let Some(p) = self.centers.first() {
            ensure_same_dim(p, x)?;
        }
        Ok(self.eval(x))
    }

    /// `‖f‖²_K`, computed from the expansion's own Gram matrix.
    pub fn norm_sq(&self) -> f64 {
        let mut total = 0.0;
        for (ci, pi) in self.coefficients.iter().zip(&self.centers) {
            for (cj, pj) in self.coefficients.iter().zip(&self.centers) {
                total += ci * cj * self.kernel.apply(pi, pj);
            }
        }
        total.max(0.0)
    }
}

/// `‖f‖²_K = (α⊙y)ᵀ K (α⊙y)`, clamped below at zero.
pub fn rkhs_norm_sq(coefficients: &[f64], labels: &[Label], gram: &GramMatrix) -> Result<f64> {
    let m = gram.point_count();
    if coefficients.len() != m || labels.len() != m {
        return Err(Error::input(format!(
            "norm: {} coefficients and {} labels for a {m}x{m} Gram",
            coefficients.len(),
            labels.len()
        )));
    }
    let beta: Vec<f64> = coefficients
        .iter()
        .zip(labels)
        .map(|(a, y)| a * y.sign())
        .collect();
    let mut total = 0.0;
    for (i, bi) in beta.iter().enumerate() {
        if *bi == 0.0 {
            continue;
        }
        total += bi * dot(gram.row(i), &beta);
    }
    Ok(total.max(0.0))
}

/// `κ = sup_{x∈X} √K(x,x)` over a box.
pub fn kernel_sup(spec: &KernelSpec, domain: &BoxDomain) -> Result<f64> {
    spec.validate()?;
    domain.validate()?;
    if let KernelSpec::Gaussian { .. } = spec {
        return Ok(1.0);
    }
    if !domain.is_bounded() {
        return Err(Error::input(
            "kernel_sup needs a bounded box for non-stationary kernels",
        ));
    }
    // ‖x‖² is maximized at a corner, coordinate by coordinate
    let max_sq: f64 = domain
        .lower
        .iter()
        .zip(&domain.upper)
        .map(|(l, u)| (l * l).max(u * u))
        .sum();
    let diag = match *spec {
        KernelSpec::Linear => max_sq,
        KernelSpec::Polynomial { degree, offset } => (max_sq + offset).powi(degree as i32),
        KernelSpec::Gaussian { .. } => unreachable!(),
    };
    Ok(diag.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label::{Negative as N, Positive as P};
    use approx::assert_relative_eq;

    const G1: KernelSpec = KernelSpec::Gaussian { sigma: 1.0 };

    #[test]
    fn kernel_examples() {
        assert_eq!(eval_kernel(&G1, &[0.3, 0.7], &[0.3, 0.7]).unwrap(), 1.0);
        assert_relative_eq!(
            eval_kernel(&G1, &[0.0], &[1.0]).unwrap(),
            0.36787944117144233,
            max_relative = 1e-15
        );
        assert_eq!(
            eval_kernel(&KernelSpec::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            11.0
        );
    }

    #[test]
    fn kernel_input_errors() {
        assert!(eval_kernel(&G1, &[0.0], &[0.0, 1.0]).is_err());
        assert!(eval_kernel(&G1, &[f64::NAN], &[0.0]).is_err());
        assert!(eval_kernel(&KernelSpec::Gaussian { sigma: 0.0 }, &[0.0], &[0.0]).is_err());
        let bad_poly = KernelSpec::Polynomial { degree: 0, offset: 1.0 };
        assert!(eval_kernel(&bad_poly, &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn polynomial_kernel() {
        let k = KernelSpec::Polynomial { degree: 2, offset: 1.0 };
        assert_eq!(eval_kernel(&k, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 144.0);
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(&G1, &[vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(g.entries(), &[1.0, 1.0, 1.0, 1.0]);

        let g = gram_matrix(&KernelSpec::Linear, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(g.entries(), &[1.0, 0.0, 0.0, 1.0]);

        // entry-wise oracle: e^{-d²} for d ∈ {0, 1, 2}
        let pts = [vec![0.0], vec![1.0], vec![2.0]];
        let g = gram_matrix(&G1, &pts).unwrap();
        let e1 = (-1.0f64).exp();
        let e4 = (-4.0f64).exp();
        let want = [1.0, e1, e4, e1, 1.0, e1, e4, e1, 1.0];
        for (a, b) in g.entries().iter().zip(want) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn gram_rejects_bad_inputs() {
        assert!(gram_matrix(&G1, &[]).is_err());
        assert!(gram_matrix(&G1, &[vec![0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(eval_expansion(&[], &[], &[], &G1, &[3.0]).unwrap(), 0.0);
        assert_eq!(
            eval_expansion(&[1.0], &[P], &[vec![0.0]], &G1, &[0.0]).unwrap(),
            1.0
        );
        let v = eval_expansion(
            &[0.5, 0.5],
            &[P, N],
            &[vec![1.0], vec![-1.0]],
            &KernelSpec::Linear,
            &[2.0],
        )
        .unwrap();
        assert_eq!(v, 2.0);
        assert!(eval_expansion(&[1.0], &[], &[vec![0.0]], &G1, &[0.0]).is_err());
    }

    #[test]
    fn norm_examples() {
        let g = gram_matrix(&G1, &[vec![0.2], vec![0.9]]).unwrap();
        assert_eq!(rkhs_norm_sq(&[0.0, 0.0], &[P, N], &g).unwrap(), 0.0);
        let g1 = gram_matrix(&G1, &[vec![0.2]]).unwrap();
        assert_eq!(rkhs_norm_sq(&[1.0], &[P], &g1).unwrap(), 1.0);
        let gl = gram_matrix(&KernelSpec::Linear, &[vec![1.0], vec![-1.0]]).unwrap();
        assert_eq!(rkhs_norm_sq(&[0.5, 0.5], &[P, N], &gl).unwrap(), 1.0);
        assert!(rkhs_norm_sq(&[0.5], &[P, N], &gl).is_err());
    }

    #[test]
    fn sup_examples() {
        let b = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(kernel_sup(&KernelSpec::Gaussian { sigma: 2.0 }, &b).unwrap(), 1.0);
        assert_relative_eq!(
            kernel_sup(&KernelSpec::Linear, &b).unwrap(),
            2f64.sqrt(),
            max_relative = 1e-15
        );
        let z = BoxDomain::new(vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert_eq!(kernel_sup(&KernelSpec::Linear, &z).unwrap(), 0.0);
        let inf = BoxDomain::new(vec![0.0], vec![f64::INFINITY]).unwrap();
        assert!(kernel_sup(&KernelSpec::Linear, &inf).is_err());
        assert_eq!(kernel_sup(&G1, &inf).unwrap(), 1.0);
    }

    #[test]
    fn spec_json_shape() {
        let s = serde_json::to_string(&KernelSpec::Gaussian { sigma: 0.5 }).unwrap();
        assert_eq!(s, r#"{"kind":"gaussian","params":{"sigma":0.5}}"#);
        let lin: KernelSpec = serde_json::from_str(r#"{"kind":"linear"}"#).unwrap();
        assert_eq!(lin, KernelSpec::Linear);
    }
}
