//! Quadrature oracle shared by the integration-test targets: a tensor-product
//! Gauss–Legendre rule evaluated directly on chart integrands, independent of
//! the QMC sampling path.

// each test target compiles its own copy and uses a different subset
#![allow(dead_code)]

use fkit::geometry::GaugeChart;
use fkit::graphs::AdmissibleGraph;
use fkit::integrate::integrand;

/// Gauss–Legendre nodes/weights on (0,1), by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = pk;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes.push(0.5 * (x + 1.0));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Tensor-product quadrature of a chart integrand over (0,1)^dim.
pub fn quadrature_oracle(g: &AdmissibleGraph, chart: &GaugeChart, nodes_per_axis: usize) -> f64 {
    let (xs, ws) = gauss_legendre(nodes_per_axis);
    let dim = chart.dim();
    let mut total = 0.0;
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let coords: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let w: f64 = idx.iter().map(|&i| ws[i]).product();
        if let Ok(val) = integrand(g, chart, &coords) {
            if val.is_finite() {
                total += w * val;
            }
        }
        for k in 0..dim {
            idx[k] += 1;
            if idx[k] < nodes_per_axis {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    total
}

/// Oracle refined until two successive node counts agree; returns the value
/// and the last refinement gap as its error estimate.
pub fn adaptive_oracle(g: &AdmissibleGraph, chart: &GaugeChart, tol: f64) -> (f64, f64) {
    let mut nodes = 24;
    let mut prev = quadrature_oracle(g, chart, nodes);
    loop {
        nodes *= 2;
        let next = quadrature_oracle(g, chart, nodes);
        let gap = (next - prev).abs();
        if gap < tol || nodes >= 192 {
            return (next, gap);
        }
        prev = next;
    }
}
