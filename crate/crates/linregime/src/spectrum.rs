//! Activation coefficients, rotation-invariant kernels and their spectra.
//!
//! A kernel here is a function `h(t)` of the normalized inner product
//! `t = <x, x'>/d`. Its eigenvalue on degree-`k` harmonics is
//! `xi_k = E h(x/sqrt(d)) Q_k(sqrt(d) x)` with `x` drawn from the coordinate law,
//! and `h(t) = sum_k xi_k B(d,k) Q_k(d t)`.

use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::seeding::Stream;
use crate::specialfn::{dim_table, recurrence_coeffs, GegenbauerEvaluator, HermiteEvaluator};
use crate::sphere::{integrate_rule, sample_rows, MarginalMeasure, MIN_PANELS};
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const DEFAULT_DEGREE: usize = 40;

/// An activation with its weak derivative and kink locations.
#[derive(Clone)]
pub struct Activation {
    name: String,
    f: ScalarFn,
    deriv: Option<Box<Activation>>,
    kinks: Vec<f64>,
    shift: Option<f64>,
}

impl fmt::Debug for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Activation")
            .field("name", &self.name)
            .field("kinks", &self.kinks)
            .field("shift", &self.shift)
            .finish()
    }
}

impl Activation {
    pub fn new(name: impl Into<String>, f: ScalarFn, deriv: Option<Activation>, mut kinks: Vec<f64>) -> Self {
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        Self { name: name.into(), f, deriv: deriv.map(Box::new), kinks, shift: None }
    }

    /// `max(u - u0, 0)`.
    pub fn shifted_relu(u0: f64) -> Self {
        let mut a = Self::new(
            format!("relu_shift_{u0}"),
            Arc::new(move |u: f64| (u - u0).max(0.0)),
            Some(Self::step(u0)),
            vec![u0],
        );
        a.shift = Some(u0);
        a
    }

    /// `1{u >= u0}`; its weak derivative is a point mass, so none is attached.
    pub fn step(u0: f64) -> Self {
        let mut a = Self::new(
            format!("step_{u0}"),
            Arc::new(move |u: f64| if u >= u0 { 1.0 } else { 0.0 }),
            None,
            vec![u0],
        );
        a.shift = Some(u0);
        a
    }

    pub fn identity() -> Self {
        Self::new("identity", Arc::new(|u| u), Some(Self::constant(1.0)), vec![])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const_{c}"), Arc::new(move |_| c), Some(Self::new("zero", Arc::new(|_| 0.0), None, vec![])), vec![])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn shift(&self) -> Option<f64> {
        self.shift
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    pub fn function(&self) -> ScalarFn {
        self.f.clone()
    }

    pub fn derivative(&self) -> Result<&Activation> {
        self.deriv
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("activation {} has no weak derivative", self.name)))
    }
}

fn panels_for(max_degree: usize) -> usize {
    MIN_PANELS.max(2 * max_degree)
}

/// `lambda_{d,k}(sigma)` for `k = 0..=max_degree`.
pub fn activation_gegenbauer_coeffs(act: &Activation, d: usize, max_degree: usize) -> Result<Vec<f64>> {
    let m = MarginalMeasure::new(d)?;
    let g = GegenbauerEvaluator::new(d, max_degree)?;
    let r = (d as f64).sqrt();
    let mut q = vec![0.0; max_degree + 1];
    let mut acc = vec![0.0; max_degree + 1];
    for (x, w) in m.rule(act.kinks(), panels_for(max_degree)) {
        let s = act.eval(x);
        if !s.is_finite() {
            return Err(Error::NonFinite { x, value: s });
        }
        if s == 0.0 {
            continue;
        }
        g.fill(r * x, &mut q);
        for (a, qk) in acc.iter_mut().zip(&q) {
            *a += w * s * qk;
        }
    }
    Ok(acc)
}

pub fn activation_gegenbauer_coeff(act: &Activation, d: usize, k: usize) -> Result<f64> {
    Ok(activation_gegenbauer_coeffs(act, d, k)?[k])
}

/// `E sigma(x)^2` under the coordinate law.
pub fn activation_norm_sq(act: &Activation, d: usize) -> Result<f64> {
    let m = MarginalMeasure::new(d)?;
    integrate_rule(&m.rule(act.kinks(), MIN_PANELS), |x| {
        let s = act.eval(x);
        s * s
    })
}

const GAUSS_HALF_WIDTH: f64 = 40.0;
const GAUSS_PANELS: usize = 128;

/// `E g(G)` for a standard Gaussian `G`, split at `kinks`.
pub fn gaussian_expectation<G: FnMut(f64) -> f64>(mut g: G, kinks: &[f64]) -> Result<f64> {
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    quad::integrate(|x| g(x) * c * (-0.5 * x * x).exp(), -GAUSS_HALF_WIDTH, GAUSS_HALF_WIDTH, GAUSS_PANELS, kinks)
}

/// `mu_k(g) = E g(G) He_k(G)` for `k = 0..=max_degree`.
pub fn hermite_coeffs(g: &dyn Fn(f64) -> f64, kinks: &[f64], max_degree: usize) -> Result<Vec<f64>> {
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut he = vec![0.0; max_degree + 1];
    let mut acc = vec![0.0; max_degree + 1];
    for (x, w) in quad::composite_rule(-GAUSS_HALF_WIDTH, GAUSS_HALF_WIDTH, GAUSS_PANELS, kinks) {
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x, value: v });
        }
        if v == 0.0 {
            continue;
        }
        HermiteEvaluator::fill(x, &mut he);
        let wx = w * c * (-0.5 * x * x).exp() * v;
        for (a, h) in acc.iter_mut().zip(&he) {
            *a += wx * h;
        }
    }
    Ok(acc)
}

pub fn hermite_coeff(g: &dyn Fn(f64) -> f64, kinks: &[f64], k: usize) -> Result<f64> {
    Ok(hermite_coeffs(g, kinks, k)?[k])
}

/// Eigenvalues of a rotation-invariant kernel on each harmonic degree.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    pub d: usize,
    pub xi: Vec<f64>,
    pub dims: Vec<f64>,
    /// `h(1)`, the total mass `sum_k xi_k B(d,k)` over all degrees.
    pub total_mass: f64,
}

impl KernelSpectrum {
    pub fn max_degree(&self) -> usize {
        self.xi.len() - 1
    }

    pub fn zero_floor(&self) -> f64 {
        1e-9 * self.total_mass.abs()
    }

    /// `sum_{k <= l} xi_k B(d,k)`.
    pub fn partial_mass(&self, l: usize) -> f64 {
        self.xi.iter().zip(&self.dims).take(l + 1).map(|(x, b)| x * b).sum()
    }

    /// Mass above the largest stored degree.
    pub fn tail_mass(&self) -> f64 {
        self.total_mass - self.partial_mass(self.max_degree())
    }

    /// `kappa_h = h(1) - sum_{k <= l} xi_k B(d,k)`.
    pub fn kappa(&self, l: usize) -> f64 {
        self.total_mass - self.partial_mass(l)
    }

    /// `d^l min_{k <= l} xi_k`, with eigenvalues under the zero floor read as 0.
    pub fn lambda_star(&self, l: usize) -> Result<f64> {
        if l > self.max_degree() {
            return invalid(format!("degree {l} above spectrum maximum {}", self.max_degree()));
        }
        let floor = self.zero_floor();
        let m = self.xi[..=l]
            .iter()
            .map(|&x| if x.abs() <= floor { 0.0 } else { x })
            .fold(f64::INFINITY, f64::min);
        Ok((self.d as f64).powi(l as i32) * m.max(0.0))
    }

    /// True when the constant component is numerically absent.
    pub fn zero_mean(&self) -> bool {
        self.xi[0].abs() < self.zero_floor()
    }

    /// Violations of the nonnegativity and mass invariants, empty when clean.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let floor = self.zero_floor();
        for (k, &x) in self.xi.iter().enumerate() {
            if x < -floor {
                out.push(format!("xi_{k} = {x:e} is negative beyond the zero floor"));
            }
        }
        let m = self.partial_mass(self.max_degree());
        if m > self.total_mass * (1.0 + 1e-8) {
            out.push(format!("partial mass {m} exceeds h(1) = {}", self.total_mass));
        }
        out
    }
}

pub fn lambda_star(spec: &KernelSpectrum, l: usize) -> Result<f64> {
    spec.lambda_star(l)
}

/// Spectrum of `h` by quadrature; `kinks` are locations in `t`.
pub fn kernel_eigenvalues(h: &dyn Fn(f64) -> f64, kinks: &[f64], d: usize, max_degree: usize) -> Result<KernelSpectrum> {
    let m = MarginalMeasure::new(d)?;
    let g = GegenbauerEvaluator::new(d, max_degree)?;
    let r = (d as f64).sqrt();
    let xk: Vec<f64> = kinks.iter().map(|t| t * r).collect();
    let mut q = vec![0.0; max_degree + 1];
    let mut xi = vec![0.0; max_degree + 1];
    for (x, w) in m.rule(&xk, panels_for(max_degree)) {
        let v = h(x / r);
        if !v.is_finite() {
            return Err(Error::NonFinite { x, value: v });
        }
        g.fill(r * x, &mut q);
        for (a, qk) in xi.iter_mut().zip(&q) {
            *a += w * v * qk;
        }
    }
    Ok(KernelSpectrum { d, xi, dims: dim_table(d, max_degree)?, total_mass: h(1.0) })
}

/// Leading-order eigenvalue `h^{(k)}(0) / d^k` for a smooth kernel.
pub fn leading_order_eigenvalue(kth_derivative_at_zero: f64, d: usize, k: usize) -> f64 {
    kth_derivative_at_zero / (d as f64).powi(k as i32)
}

/// A kernel of the normalized inner product `t = <x, x'>/d`.
pub trait DotKernel: Send + Sync {
    fn eval(&self, t: f64) -> f64;

    fn at_one(&self) -> f64 {
        self.eval(1.0)
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> DotKernel for F {
    fn eval(&self, t: f64) -> f64 {
        self(t)
    }
}

/// `h(t) = sum_k c_k Q_k(d t)`.
#[derive(Debug, Clone)]
pub struct GegenbauerSeries {
    d: usize,
    weights: Vec<f64>,
}

impl GegenbauerSeries {
    pub fn new(d: usize, weights: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return invalid(format!("dimension d = {d} must be at least 2"));
        }
        Ok(Self { d, weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

impl DotKernel for GegenbauerSeries {
    fn eval(&self, t: f64) -> f64 {
        // Q_k(d t) by the recurrence in u = t, without allocating
        let u = t.clamp(-1.0, 1.0);
        let w = &self.weights;
        if w.is_empty() {
            return 0.0;
        }
        let mut acc = w[0];
        if w.len() == 1 {
            return acc;
        }
        let (mut q0, mut q1) = (1.0, u);
        acc += w[1] * q1;
        for k in 1..w.len() - 1 {
            let (s, tk) = recurrence_coeffs(self.d, k);
            let q2 = (u * q1 - s * q0) / tk;
            acc += w[k + 1] * q2;
            q0 = q1;
            q1 = q2;
        }
        acc
    }

    fn at_one(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `E sigma(x) sigma(-x)` under the marginal measure.
pub fn activation_reflected_product(act: &Activation, d: usize) -> Result<f64> {
    let m = MarginalMeasure::new(d)?;
    let mut kinks: Vec<f64> = act.kinks().iter().flat_map(|&k| [k, -k]).collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    integrate_rule(&m.rule(&kinks, MIN_PANELS), |x| act.eval(x) * act.eval(-x))
}

/// Truncated series weights `lambda_k^2 B(d,k)` plus the unrepresented tail.
/// The even and odd parts of the tail go on degrees `K + 1` and `K + 2` by
/// parity, which keeps `h(1)`, `h(-1)` and the parity of the kernel exact
/// and the kernel PSD.
fn folded_weights(coeffs: &[f64], dims: &[f64], norm_sq: f64, reflected: f64) -> (Vec<f64>, f64) {
    let mut w: Vec<f64> = coeffs.iter().zip(dims).map(|(l, b)| l * l * b).collect();
    let k = w.len() - 1;
    let part = |parity: usize| w.iter().skip(parity).step_by(2).sum::<f64>();
    let even = 0.5 * (norm_sq + reflected) - part(0);
    let odd = 0.5 * (norm_sq - reflected) - part(1);
    let (first, second) = if (k + 1) % 2 == 0 { (even, odd) } else { (odd, even) };
    w.push(first.max(0.0));
    w.push(second.max(0.0));
    (w, even + odd)
}

fn warn_truncation(which: &str, d: usize, k: usize, tail: f64, total: f64) {
    use std::collections::HashSet;
    use std::sync::{Mutex, OnceLock};
    // once per (kernel, d, K, total): sweeps build the same kernel many times
    static SEEN: OnceLock<Mutex<HashSet<(String, usize, usize, u64)>>> = OnceLock::new();
    if tail > 1e-4 * total.abs() {
        let key = (which.to_string(), d, k, total.to_bits());
        let fresh = SEEN.get_or_init(Default::default).lock().map(|mut s| s.insert(key)).unwrap_or(true);
        if !fresh {
            return;
        }
        log::warn!("{which} kernel, d = {d}: tail mass {tail:e} above degree {k} exceeds 1e-4 of h(1) = {total}");
    }
}

/// Kernel `E_w sigma(<w,x>) sigma(<w,x'>)` of the random-features model.
#[derive(Debug, Clone)]
pub struct RfKernel {
    activation: Activation,
    d: usize,
    coeffs: Vec<f64>,
    dims: Vec<f64>,
    norm_sq: f64,
    tail: f64,
    series: GegenbauerSeries,
}

impl RfKernel {
    pub fn new(act: &Activation, d: usize, max_degree: usize) -> Result<Self> {
        let coeffs = activation_gegenbauer_coeffs(act, d, max_degree)?;
        let dims = dim_table(d, max_degree)?;
        let norm_sq = activation_norm_sq(act, d)?;
        let reflected = activation_reflected_product(act, d)?;
        let (w, tail) = folded_weights(&coeffs, &dims, norm_sq, reflected);
        warn_truncation("RF", d, max_degree, tail, norm_sq);
        Ok(Self { activation: act.clone(), d, coeffs, dims, norm_sq, tail, series: GegenbauerSeries::new(d, w)? })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dims(&self) -> &[f64] {
        &self.dims
    }

    /// Truncation tail `h(1) - sum_{k <= K} lambda_k^2 B(d,k)`.
    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    pub fn spectrum(&self) -> KernelSpectrum {
        KernelSpectrum {
            d: self.d,
            xi: self.coeffs.iter().map(|l| l * l).collect(),
            dims: self.dims.clone(),
            total_mass: self.norm_sq,
        }
    }

    pub fn series(&self) -> &GegenbauerSeries {
        &self.series
    }

    /// Monte Carlo estimate `(mean, standard error)` of `h(<x1,x2>/d)`.
    pub fn eval_mc(&self, x1: &[f64], x2: &[f64], draws: usize, rng: &mut Stream) -> (f64, f64) {
        let d = self.d;
        let (mut s1, mut s2) = (0.0, 0.0);
        let chunk = 4096;
        let mut left = draws;
        while left > 0 {
            let m = left.min(chunk);
            let w = sample_rows(m, d, 1.0, rng);
            for i in 0..m {
                let (mut a, mut b) = (0.0, 0.0);
                for j in 0..d {
                    a += w[(i, j)] * x1[j];
                    b += w[(i, j)] * x2[j];
                }
                let v = self.activation.eval(a) * self.activation.eval(b);
                s1 += v;
                s2 += v * v;
            }
            left -= m;
        }
        let n = draws as f64;
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }
}

impl DotKernel for RfKernel {
    fn eval(&self, t: f64) -> f64 {
        self.series.eval(t)
    }

    fn at_one(&self) -> f64 {
        self.norm_sq
    }
}

/// Kernel `t E_w sigma'(<w,x>) sigma'(<w,x'>)` of the neural-tangent model
/// (the per-coordinate normalization of `<x,x'>/d E sigma' sigma'`).
#[derive(Debug, Clone)]
pub struct NtKernel {
    d: usize,
    deriv_coeffs: Vec<f64>,
    dims: Vec<f64>,
    norm_sq: f64,
    tail: f64,
    inner: GegenbauerSeries,
    gamma_series: GegenbauerSeries,
}

/// `Gamma_m / d = t_{m-1} c_{m-1} + s_{m+1} c_{m+1}` from weights `c`.
fn shifted_weights(d: usize, c: &[f64]) -> Vec<f64> {
    let top = c.len();
    (0..=top)
        .map(|m| {
            let lo = if m >= 1 { recurrence_coeffs(d, m - 1).1 * c[m - 1] } else { 0.0 };
            let hi = if m + 1 < top { recurrence_coeffs(d, m + 1).0 * c[m + 1] } else { 0.0 };
            lo + hi
        })
        .collect()
}

impl NtKernel {
    pub fn new(act: &Activation, d: usize, max_degree: usize) -> Result<Self> {
        let deriv = act.derivative()?;
        let deriv_coeffs = activation_gegenbauer_coeffs(deriv, d, max_degree)?;
        let dims = dim_table(d, max_degree)?;
        let norm_sq = activation_norm_sq(deriv, d)?;
        let reflected = activation_reflected_product(deriv, d)?;
        let (w, tail) = folded_weights(&deriv_coeffs, &dims, norm_sq, reflected);
        warn_truncation("NT", d, max_degree, tail, norm_sq);
        let gamma = shifted_weights(d, &w);
        Ok(Self {
            d,
            deriv_coeffs,
            dims,
            norm_sq,
            tail,
            inner: GegenbauerSeries::new(d, w)?,
            gamma_series: GegenbauerSeries::new(d, gamma)?,
        })
    }

    pub fn deriv_coeffs(&self) -> &[f64] {
        &self.deriv_coeffs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    /// `Gamma_{d,m}` for `m = 0..=K+3` (degrees `K+1` and `K+2` carry the folded tail).
    pub fn gamma(&self) -> Vec<f64> {
        self.gamma_series.weights().iter().map(|g| g * self.d as f64).collect()
    }

    /// `t * sum_k lambda_k(sigma')^2 B(d,k) Q_k(d t)`.
    pub fn eval_direct(&self, t: f64) -> f64 {
        t.clamp(-1.0, 1.0) * self.inner.eval(t)
    }

    /// `sum_m (Gamma_m / d) Q_m(d t)`.
    pub fn eval_gamma(&self, t: f64) -> f64 {
        self.gamma_series.eval(t)
    }

    pub fn spectrum(&self) -> KernelSpectrum {
        let g = self.gamma_series.weights();
        let k = self.dims.len() - 1;
        KernelSpectrum {
            d: self.d,
            xi: (0..=k).map(|m| g[m] / self.dims[m]).collect(),
            dims: self.dims.clone(),
            total_mass: self.norm_sq,
        }
    }
}

impl DotKernel for NtKernel {
    fn eval(&self, t: f64) -> f64 {
        self.eval_direct(t)
    }

    fn at_one(&self) -> f64 {
        self.norm_sq
    }
}

/// Telescoped sum `sum_m Gamma_m / d` for truncated coefficients `lambda_k(sigma')`.
pub fn gamma_sum(d: usize, deriv_coeffs: &[f64]) -> Result<f64> {
    let dims = dim_table(d, deriv_coeffs.len().saturating_sub(1))?;
    let c: Vec<f64> = deriv_coeffs.iter().zip(&dims).map(|(l, b)| l * l * b).collect();
    Ok(shifted_weights(d, &c).iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use crate::specialfn::dim_harmonics_f64;
    use crate::sphere::sample_sphere;

    #[test]
    fn constant_and_linear_coefficients() {
        for d in [5, 30, 200] {
            let c = activation_gegenbauer_coeffs(&Activation::constant(1.0), d, 6).unwrap();
            assert!((c[0] - 1.0).abs() < 1e-12);
            assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
            let l = activation_gegenbauer_coeffs(&Activation::identity(), d, 6).unwrap();
            assert!((l[1] - 1.0 / (d as f64).sqrt()).abs() < 1e-12);
            assert!(l.iter().enumerate().filter(|(k, _)| *k != 1).all(|(_, v)| v.abs() < 1e-12));
        }
    }

    #[test]
    fn parseval_exact_for_polynomial_activation() {
        let d = 50;
        let act = Activation::new("cubic", Arc::new(|u: f64| u * u * u - 2.0 * u * u + 0.5), None, vec![]);
        let c = activation_gegenbauer_coeffs(&act, d, 40).unwrap();
        let dims = dim_table(d, 40).unwrap();
        let s: f64 = c.iter().zip(&dims).map(|(l, b)| l * l * b).sum();
        let n = activation_norm_sq(&act, d).unwrap();
        assert!((s - n).abs() < 1e-10 * n);
    }

    #[test]
    fn parseval_relu_deficit_is_truncation_tail() {
        let d = 50;
        let act = Activation::shifted_relu(0.5);
        let norm = activation_norm_sq(&act, d).unwrap();
        let c = activation_gegenbauer_coeffs(&act, d, 160).unwrap();
        let dims = dim_table(d, 160).unwrap();
        let partial = |k: usize| -> f64 { c[..=k].iter().zip(&dims).map(|(l, b)| l * l * b).sum() };
        let (t40, t80, t160) = (norm - partial(40), norm - partial(80), norm - partial(160));
        assert!(t40 > 0.0 && t80 > 0.0 && t160 > 0.0);
        assert!(t40 > t80 && t80 > t160);
        // at d = 50 the tail decays roughly like K^{-2.4} over this range
        assert!(t40 < 1e-4 && t160 < 3e-6, "{t40} {t80} {t160}");
        let slope = (t40 / t160).ln() / 4f64.ln();
        assert!(slope > 2.0 && slope < 3.0, "tail slope {slope}");
    }

    #[test]
    fn step_hermite_values() {
        let step = Activation::step(0.0);
        let mu = hermite_coeffs(&|u| step.eval(u), step.kinks(), 3).unwrap();
        assert!((mu[0] - 0.5).abs() < 1e-12);
        assert!((mu[1] - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!(mu[2].abs() < 1e-12);
    }

    #[test]
    fn hermite_x_squared_relation() {
        let step = Activation::step(0.5);
        let mu = hermite_coeffs(&|u| step.eval(u), step.kinks(), 10).unwrap();
        let nu = hermite_coeffs(&|u| u * u * step.eval(u), step.kinks(), 8).unwrap();
        for k in 0..=8 {
            let lower = if k >= 2 { (k * (k - 1)) as f64 * mu[k - 2] } else { 0.0 };
            let want = mu[k + 2] + (2 * k + 1) as f64 * mu[k] + lower;
            assert!((nu[k] - want).abs() < 1e-7, "k={k}");
        }
    }

    #[test]
    fn kernel_eigen_examples() {
        let s = kernel_eigenvalues(&|_| 2.5, &[], 20, 5).unwrap();
        assert!((s.xi[0] - 2.5).abs() < 1e-12 && s.xi[1..].iter().all(|v| v.abs() < 1e-12));
        let s = kernel_eigenvalues(&|t| t, &[], 20, 5).unwrap();
        assert!((s.xi[1] - 1.0 / 20.0).abs() < 1e-12);
        assert!(s.xi.iter().enumerate().filter(|(k, _)| *k != 1).all(|(_, v)| v.abs() < 1e-12));
        assert_eq!(s.lambda_star(1).unwrap(), 0.0);
        assert!((s.lambda_star(0).unwrap() - s.xi[0]).abs() < 1e-15);
        assert!(s.lambda_star(6).is_err());
    }

    #[test]
    fn rf_spectrum_matches_squared_coefficients() {
        let d = 30;
        let act = Activation::shifted_relu(0.5);
        let k = RfKernel::new(&act, d, 30).unwrap();
        let direct = kernel_eigenvalues(&|t| k.eval(t), &[], d, 10).unwrap();
        for j in 0..=10 {
            let want = k.coeffs()[j].powi(2);
            assert!((direct.xi[j] - want).abs() < 1e-9 * k.at_one(), "k={j}");
        }
        let spec = k.spectrum();
        assert!(spec.check().is_empty());
        assert!(spec.lambda_star(1).unwrap() > 0.0);
        assert!((spec.kappa(1) - (k.at_one() - spec.partial_mass(1))).abs() < 1e-15);
    }

    #[test]
    fn rf_diagonal_and_symmetry() {
        let d = 30;
        let act = Activation::shifted_relu(0.5);
        let k = RfKernel::new(&act, d, 40).unwrap();
        assert!((k.eval(1.0) - activation_norm_sq(&act, d).unwrap()).abs() < 1e-12);
        // even activation gives an even kernel
        let even = Activation::new("abs", Arc::new(|u: f64| u.abs()), None, vec![0.0]);
        let ke = RfKernel::new(&even, d, 40).unwrap();
        for t in [0.1, 0.37, 0.8] {
            assert!((ke.eval(t) - ke.eval(-t)).abs() < 1e-12);
        }
    }

    #[test]
    fn rf_series_matches_monte_carlo() {
        let d = 30;
        let act = Activation::shifted_relu(0.5);
        let k = RfKernel::new(&act, d, 40).unwrap();
        let x = sample_sphere(20, d, 4).unwrap();
        let mut rng = seeding::stream(8, &[]);
        let mut worst: f64 = 0.0;
        for p in 0..10 {
            let (a, b) = (x.row(2 * p), x.row(2 * p + 1));
            let t = a.iter().zip(&b).map(|(u, v)| u * v).sum::<f64>() / d as f64;
            let (m, se) = k.eval_mc(&a, &b, 1_000_000, &mut rng);
            worst = worst.max((m - k.eval(t)).abs() / se);
        }
        assert!(worst < 3.0, "worst z-score {worst}");
    }

    #[test]
    fn nt_gamma_identities() {
        let d = 30;
        let act = Activation::shifted_relu(0.5);
        let k = NtKernel::new(&act, d, 40).unwrap();
        assert!(k.gamma().iter().all(|&g| g >= 0.0));
        for t in [-0.9, -0.2, 0.0, 0.13, 0.5, 1.0] {
            assert!((k.eval_direct(t) - k.eval_gamma(t)).abs() < 1e-12);
        }
        // telescoping: the truncated Gamma sum equals the truncated Parseval sum
        let c = k.deriv_coeffs();
        let dims = dim_table(d, 40).unwrap();
        let partial: f64 = c.iter().zip(&dims).map(|(l, b)| l * l * b).sum();
        assert!((gamma_sum(d, c).unwrap() - partial).abs() < 1e-12);
        // with the tail folded in, the Gamma weights sum to h(1) = E sigma'^2
        let total: f64 = k.gamma().iter().sum::<f64>() / d as f64;
        assert!((total - k.at_one()).abs() < 1e-12);
        let spec = k.spectrum();
        assert!(spec.check().is_empty());
        assert!((spec.xi[1] * dim_harmonics_f64(d, 1).unwrap() - k.gamma()[1] / d as f64).abs() < 1e-15);
    }

    #[test]
    fn hermite_limit_decreases() {
        let act = Activation::shifted_relu(0.5);
        let mu = hermite_coeffs(&|u| act.eval(u), act.kinks(), 5).unwrap();
        let mut gaps = vec![vec![0.0; 3]; 6];
        for (i, d) in [20usize, 80, 320].into_iter().enumerate() {
            let lam = activation_gegenbauer_coeffs(&act, d, 5).unwrap();
            let dims = dim_table(d, 5).unwrap();
            for k in 0..=5 {
                let fact: f64 = (1..=k).map(|j| j as f64).product();
                gaps[k][i] = (lam[k] * (dims[k] * fact).sqrt() - mu[k]).abs();
            }
        }
        // high-precision reference values of the signed gap
        let reference: [[f64; 3]; 6] = [
            [0.0032979741, 0.00082510529, 0.00020628711],
            [-0.0027709023, -0.00068894353, -0.00017198978],
            [-0.0074417918, -0.0017564071, -0.00043213469],
            [0.0039411081, 0.0012449583, 0.0003291017],
            [0.030372454, 0.0074441039, 0.0018423867],
            [-0.0018690872, -0.0025284423, -0.00079497626],
        ];
        for (k, g) in gaps.iter().enumerate() {
            for i in 0..3 {
                assert!((g[i] - reference[k][i].abs()).abs() < 1e-8, "k={k}: {g:?}");
            }
        }
        for g in &gaps[..5] {
            assert!(g[0] > g[1] && g[1] > g[2]);
        }
        // at k = 5 the gap grows from d = 20 to d = 80 before decaying
        assert!(gaps[5][1] > gaps[5][0] && gaps[5][2] < gaps[5][1]);
    }

    #[test]
    fn smooth_kernel_leading_order() {
        let d = 400;
        let s = kernel_eigenvalues(&|t: f64| t.exp(), &[], d, 3).unwrap();
        for k in 0..=3 {
            let lead = leading_order_eigenvalue(1.0, d, k);
            assert!((s.xi[k] / lead - 1.0).abs() < 0.02, "k={k}");
        }
    }
}
