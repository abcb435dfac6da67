//! Least-squares fitting of linear feature models and risk estimation.

use super::features::FeatureModel;
use super::target::TargetFunction;
use crate::error::{invalid, Result};
use crate::linalg::{self, LstsqInfo};
use crate::seeding;
use crate::sphere::{sample_sphere_with, SphereSample};
use faer::MatRef;

#[derive(Debug, Clone)]
pub struct MinNormFit {
    pub coef: Vec<f64>,
    pub info: LstsqInfo,
}

/// Minimum-norm least squares with relative singular-value cutoff `1e-10`.
pub fn fit_minnorm(z: MatRef<'_, f64>, y: &[f64]) -> Result<MinNormFit> {
    if z.nrows() != y.len() {
        return invalid(format!("design has {} rows but {} labels", z.nrows(), y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return invalid("non-finite label");
    }
    let (coef, info) = linalg::min_norm_lstsq(z, y)?;
    Ok(MinNormFit { coef, info })
}

/// Ridge penalty conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RidgeScaling {
    /// `(1/n)|y - Z a|^2 + (N lambda / d)|a|^2` with `N` neurons.
    SampleWidth { neurons: usize, dim: usize },
    /// `|y - Z a|^2 + lambda |a|^2`.
    Plain,
}

impl RidgeScaling {
    /// Penalty on `|a|^2` once the loss is written as `|y - Z a|^2`.
    pub fn effective_penalty(&self, n: usize, lambda: f64) -> f64 {
        match *self {
            RidgeScaling::SampleWidth { neurons, dim } => n as f64 * neurons as f64 * lambda / dim as f64,
            RidgeScaling::Plain => lambda,
        }
    }
}

pub fn fit_ridge(z: MatRef<'_, f64>, y: &[f64], lambda: f64, scaling: RidgeScaling) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) {
        return invalid(format!("ridge parameter {lambda} must be nonnegative"));
    }
    if z.nrows() != y.len() {
        return invalid(format!("design has {} rows but {} labels", z.nrows(), y.len()));
    }
    linalg::ridge_solve(z, y, scaling.effective_penalty(z.nrows(), lambda))
}

pub fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub test_mse: f64,
    /// Standard error of `test_mse`.
    pub std_error: f64,
    pub r0: f64,
    pub normalized_risk: f64,
    pub r0_closed_form: bool,
}

/// Risk of predictions against the target on a given sample. `R0` is the
/// registered closed form when available, else `E f^2` on the same sample.
pub fn risk_on(pred: &[f64], target: &TargetFunction, x: &SphereSample) -> RiskEstimate {
    let f = target.eval_rows(x);
    let n = f.len() as f64;
    let sq: Vec<f64> = pred.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).collect();
    let test_mse = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|v| (v - test_mse).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let (r0, closed) = match target.second_moment() {
        Some(m) => (m, true),
        None => (f.iter().map(|v| v * v).sum::<f64>() / n, false),
    };
    RiskEstimate { test_mse, std_error: (var / n).sqrt(), r0, normalized_risk: test_mse / r0, r0_closed_form: closed }
}

/// Monte Carlo test risk of a fitted model on `n_test` fresh points.
pub fn estimate_risk(model: &FeatureModel, target: &TargetFunction, n_test: usize, seed: u64) -> Result<RiskEstimate> {
    let x = sample_sphere_with(n_test, model.dim(), &mut seeding::stream(seed, &[]));
    Ok(risk_on(&model.predict(&x)?, target, &x))
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub coef: Vec<f64>,
    pub train_mse: f64,
    pub test_mse: f64,
    pub r0: f64,
    pub normalized_risk: f64,
    pub rank: Option<usize>,
    pub cutoff: Option<f64>,
}
