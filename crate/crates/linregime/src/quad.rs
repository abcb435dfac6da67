//! Composite Gauss-Legendre rules.

use crate::error::{Error, Result};
use std::sync::OnceLock;

pub const NODES_PER_PANEL: usize = 16;

fn legendre_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes and weights of the 16-point rule on [-1, 1].
pub fn gauss_legendre16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(NODES_PER_PANEL))
}

/// Panel edges: `panels` uniform cells on [a, b] plus every break strictly inside.
pub fn panel_edges(a: f64, b: f64, panels: usize, breaks: &[f64]) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=panels)
        .map(|i| a + (b - a) * i as f64 / panels as f64)
        .collect();
    edges.extend(breaks.iter().copied().filter(|&c| c > a && c < b));
    edges.sort_by(|x, y| x.total_cmp(y));
    edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    edges
}

/// Quadrature nodes and weights over [a, b] with the given breaks.
pub fn composite_rule(a: f64, b: f64, panels: usize, breaks: &[f64]) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre16();
    let edges = panel_edges(a, b, panels, breaks);
    let mut out = Vec::with_capacity((edges.len() - 1) * NODES_PER_PANEL);
    for e in edges.windows(2) {
        let half = 0.5 * (e[1] - e[0]);
        let mid = 0.5 * (e[1] + e[0]);
        for (x, w) in xs.iter().zip(ws) {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

/// Integral of `f` over [a, b]; aborts on a non-finite integrand value.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, breaks: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in composite_rule(a, b, panels, breaks) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x, value: v });
        }
        acc += w * v;
    }
    Ok(acc)
}
