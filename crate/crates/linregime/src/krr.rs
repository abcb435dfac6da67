//! Kernel ridge regression with rotation-invariant kernels.

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::linmodels::{risk_on, RiskEstimate, TargetFunction};
use crate::seeding::{self, Stream};
use crate::spectrum::{DotKernel, KernelSpectrum};
use crate::sphere::{sample_sphere_with, SphereSample};
use faer::linalg::solvers::Solve;
use faer::{Col, ColRef, Mat, Side};
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_MAX_KERNEL_ROWS: usize = 20_000;

/// `H_ij = h(<x_i, x_j>/d)`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub h: Mat<f64>,
    pub at_one: f64,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.h.nrows()
    }
}

pub fn assemble_kernel(kernel: &dyn DotKernel, x: &SphereSample, max_rows: usize) -> Result<KernelMatrix> {
    let n = x.n();
    if n > max_rows {
        return Err(Error::MemoryCap { entries: (n as u128).pow(2), cap: (max_rows as u128).pow(2) });
    }
    let d = x.dim() as f64;
    let gram: Mat<f64> = &x.points * x.points.transpose();
    let at_one = kernel.at_one();
    let row = |i: usize| -> Vec<f64> { (0..i).map(|j| kernel.eval(gram[(i, j)] / d)).collect() };
    #[cfg(feature = "parallel")]
    let lower: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let lower: Vec<Vec<f64>> = (0..n).map(row).collect();
    let h = Mat::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => at_one,
        std::cmp::Ordering::Greater => lower[i][j],
        std::cmp::Ordering::Less => lower[j][i],
    });
    Ok(KernelMatrix { h, at_one })
}

/// Cross-kernel `h(<x_i, y_j>/d)` between test rows `x` and training rows `y`.
pub fn cross_kernel(kernel: &dyn DotKernel, x: &SphereSample, train: &SphereSample) -> Mat<f64> {
    let d = x.dim() as f64;
    let g: Mat<f64> = &x.points * train.points.transpose();
    Mat::from_fn(x.n(), train.n(), |i, j| kernel.eval(g[(i, j)] / d))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KrrOptions {
    /// Fit `y - mean(y)` and add the mean back to predictions.
    pub center_labels: bool,
}

/// Whether labels should be centered for a kernel with this spectrum
/// (its constant eigenvalue is below `1e-9 h(1)`).
pub fn centering_required(spec: &KernelSpectrum) -> bool {
    spec.zero_mean()
}

#[derive(Debug, Clone)]
pub struct KrrFit {
    /// `(H + lambda I)^{-1} (y - offset)`.
    pub coef: Vec<f64>,
    pub lambda: f64,
    /// `lambda` after any jitter substitution.
    pub lambda_used: f64,
    pub offset: f64,
    /// `|(H + lambda I) coef - y| / |y|`.
    pub residual: f64,
}

fn shifted(h: &KernelMatrix, lambda: f64) -> Mat<f64> {
    let mut a = h.h.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    a
}

fn condition_estimate(a: &Mat<f64>) -> f64 {
    match linalg::sym_eigenvalues(a.as_ref()) {
        Ok(ev) => {
            let hi = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let lo = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            hi / lo
        }
        Err(_) => f64::INFINITY,
    }
}

pub fn krr_fit(h: &KernelMatrix, y: &[f64], lambda: f64, opts: KrrOptions) -> Result<KrrFit> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return invalid(format!("ridge parameter {lambda} must be finite and nonnegative"));
    }
    if y.len() != h.n() {
        return invalid(format!("{} labels for a {}-point kernel", y.len(), h.n()));
    }
    let offset = if opts.center_labels { y.iter().sum::<f64>() / y.len().max(1) as f64 } else { 0.0 };
    let yc: Vec<f64> = y.iter().map(|v| v - offset).collect();
    let mut lambda_used = lambda;
    let mut a = shifted(h, lambda);
    let mut llt = a.llt(Side::Lower);
    if llt.is_err() && lambda == 0.0 {
        lambda_used = 1e-12 * h.at_one;
        log::warn!("kernel matrix numerically singular at lambda = 0; using lambda = {lambda_used:e}");
        a = shifted(h, lambda_used);
        llt = a.llt(Side::Lower);
    }
    let llt = llt.map_err(|_| Error::Singular { condition: condition_estimate(&a) })?;
    let c: Col<f64> = llt.solve(ColRef::from_slice(&yc));
    let coef: Vec<f64> = c.iter().copied().collect();
    let back = linalg::matvec(a.as_ref(), &coef);
    let res = back.iter().zip(&yc).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let residual = res / linalg::norm(&yc).max(f64::MIN_POSITIVE);
    Ok(KrrFit { coef, lambda, lambda_used, offset, residual })
}

/// `offset + sum_i coef_i h(<x, x_i>/d)`.
pub fn krr_predict(kernel: &dyn DotKernel, train: &SphereSample, fit: &KrrFit, x: &[f64]) -> f64 {
    let d = train.dim() as f64;
    fit.offset
        + (0..train.n())
            .map(|i| {
                let t: f64 = (0..train.dim()).map(|j| train.points[(i, j)] * x[j]).sum();
                fit.coef[i] * kernel.eval(t / d)
            })
            .sum::<f64>()
}

pub fn krr_predict_sample(kernel: &dyn DotKernel, train: &SphereSample, fit: &KrrFit, x: &SphereSample) -> Vec<f64> {
    let k = cross_kernel(kernel, x, train);
    linalg::matvec(k.as_ref(), &fit.coef).into_iter().map(|v| v + fit.offset).collect()
}

pub fn krr_test_risk(
    kernel: &dyn DotKernel,
    train: &SphereSample,
    fit: &KrrFit,
    target: &TargetFunction,
    n_test: usize,
    seed: u64,
) -> RiskEstimate {
    let x = sample_sphere_with(n_test, train.dim(), &mut seeding::stream(seed, &[]));
    risk_on(&krr_predict_sample(kernel, train, fit, &x), target, &x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRisk {
    /// `lambda^2 |(H + lambda I)^{-1} y|^2 / n`.
    pub closed_form: f64,
    /// `(1/n) sum (y_i - f(x_i))^2`.
    pub direct: f64,
}

pub fn krr_empirical_risk(h: &KernelMatrix, y: &[f64], fit: &KrrFit) -> Result<EmpiricalRisk> {
    let n = y.len() as f64;
    let closed_form = fit.lambda_used.powi(2) * fit.coef.iter().map(|c| c * c).sum::<f64>() / n;
    let pred = linalg::matvec(h.h.as_ref(), &fit.coef);
    let direct = pred.iter().zip(y).map(|(p, v)| (v - fit.offset - p).powi(2)).sum::<f64>() / n;
    let scale = y.iter().map(|v| v * v).sum::<f64>() / n;
    let tol = 1e-8 * closed_form.max(direct) + 1e-20 * scale;
    if (closed_form - direct).abs() > tol {
        return Err(Error::RiskMismatch { closed_form, direct });
    }
    Ok(EmpiricalRisk { closed_form, direct })
}

/// `(1 + eps)(|f|^2 + tau^2)(lambda / (lambda + kappa))^2`.
pub fn interpolator_bound(signal_plus_noise: f64, lambda: f64, kappa: f64, eps: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    (1.0 + eps) * signal_plus_noise * (lambda / (lambda + kappa)).powi(2)
}

/// `f(x_i) + tau * noise_i`.
pub fn noisy_labels(target: &TargetFunction, x: &SphereSample, tau: f64, rng: &mut Stream) -> Vec<f64> {
    target
        .eval_rows(x)
        .into_iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(rng);
            v + tau * e
        })
        .collect()
}
