//! Gauss–Legendre rules, tensorized over boxes.

use crate::domain::{tensor_product, BoxDomain};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite rule on `[a, b]`: `panels` equal sub-intervals, `n` nodes each.
pub fn composite_rule(a: f64, b: f64, n: usize, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(n * panels);
    let mut weights = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, w) in xs.iter().zip(&ws) {
            nodes.push(lo + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

/// Tensor-product rule over a bounded box. Weights integrate against
/// Lebesgue measure (they sum to the box volume).
pub fn tensor_rule(domain: &BoxDomain, n: usize, panels: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let per_axis: Vec<(Vec<f64>, Vec<f64>)> = domain
        .lower
        .iter()
        .zip(&domain.upper)
        .map(|(l, u)| composite_rule(*l, *u, n, panels))
        .collect();
    let nodes = tensor_product(&per_axis.iter().map(|a| a.0.clone()).collect::<Vec<_>>());
    let weights = tensor_product(&per_axis.iter().map(|a| a.1.clone()).collect::<Vec<_>>())
        .into_iter()
        .map(|w| w.iter().product())
        .collect();
    (nodes, weights)
}
