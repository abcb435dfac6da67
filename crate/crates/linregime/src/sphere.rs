//! Uniform sampling on `S^{d-1}(sqrt(d))` and integration against the law of
//! one coordinate, `tau_d(dx) = C_d (1 - x^2/d)^{(d-3)/2} dx` on `[-sqrt(d), sqrt(d)]`.
//!
//! Integrals are taken in the angle `x = sqrt(d) sin(theta)`, where the weight
//! becomes `C_d sqrt(d) cos^{d-2}(theta)`. That weight is smooth for every
//! `d >= 2`, including the endpoint singularity at `d = 2`.

use crate::error::{invalid, Result};
use crate::quad;
use crate::seeding::{self, Stream};
use faer::Mat;
use rand_distr::{Distribution, StandardNormal};

/// `n` points of radius `sqrt(d)`, one per row.
#[derive(Debug, Clone)]
pub struct SphereSample {
    pub points: Mat<f64>,
}

impl SphereSample {
    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn radius(&self) -> f64 {
        (self.dim() as f64).sqrt()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.dim()).map(|j| self.points[(i, j)]).collect()
    }

    /// The first `n` rows.
    pub fn prefix(&self, n: usize) -> SphereSample {
        SphereSample { points: self.points.subrows(0, n.min(self.n())).to_owned() }
    }
}

/// Rows drawn as normalized Gaussians and scaled to `radius`.
pub fn sample_rows(n: usize, d: usize, radius: f64, rng: &mut Stream) -> Mat<f64> {
    let mut buf = vec![0.0; n * d];
    for row in buf.chunks_mut(d.max(1)) {
        let mut norm2 = 0.0f64;
        for v in row.iter_mut() {
            *v = StandardNormal.sample(rng);
            norm2 += *v * *v;
        }
        let s = radius / norm2.sqrt();
        row.iter_mut().for_each(|v| *v *= s);
    }
    Mat::from_fn(n, d, |i, j| buf[i * d + j])
}

pub fn sample_sphere_with(n: usize, d: usize, rng: &mut Stream) -> SphereSample {
    SphereSample { points: sample_rows(n, d, (d as f64).sqrt(), rng) }
}

pub fn sample_sphere(n: usize, d: usize, seed: u64) -> Result<SphereSample> {
    if n == 0 || d < 2 {
        return invalid(format!("need n >= 1 and d >= 2, got n = {n}, d = {d}"));
    }
    Ok(sample_sphere_with(n, d, &mut seeding::stream(seed, &[])))
}

pub const MIN_PANELS: usize = 64;

/// Law of `<e, x>` for a unit vector `e` and `x` uniform on `S^{d-1}(sqrt(d))`.
#[derive(Debug, Clone)]
pub struct MarginalMeasure {
    d: usize,
    log_c: f64,
    theta_max: f64,
}

impl MarginalMeasure {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return invalid(format!("dimension d = {d} must be at least 2"));
        }
        let df = d as f64;
        let log_c = libm::lgamma(df - 1.0)
            - (df - 2.0) * std::f64::consts::LN_2
            - 0.5 * df.ln()
            - 2.0 * libm::lgamma((df - 1.0) / 2.0);
        // beyond theta_max the weight cos^{d-2} is below e^{-800}
        let theta_max = if d <= 2 {
            std::f64::consts::FRAC_PI_2
        } else {
            (-800.0 / (df - 2.0)).exp().acos().min(std::f64::consts::FRAC_PI_2)
        };
        Ok(Self { d, log_c, theta_max })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `C_d`.
    pub fn normalization(&self) -> f64 {
        self.log_c.exp()
    }

    /// True when the density is not bounded and continuous at the endpoints (`d < 4`).
    pub fn flagged(&self) -> bool {
        self.d < 4
    }

    pub fn density(&self, x: f64) -> f64 {
        let df = self.d as f64;
        let u = 1.0 - x * x / df;
        if u <= 0.0 || !x.is_finite() {
            return 0.0;
        }
        (self.log_c + 0.5 * (df - 3.0) * u.ln()).exp()
    }

    /// Nodes `x` and weights for integrals against the measure, with panel edges at `kinks`.
    pub fn rule(&self, kinks: &[f64], panels: usize) -> Vec<(f64, f64)> {
        let df = self.d as f64;
        let r = df.sqrt();
        let breaks: Vec<f64> = kinks
            .iter()
            .filter(|k| k.abs() < r)
            .map(|k| (k / r).asin())
            .collect();
        let scale = self.normalization() * r;
        quad::composite_rule(-self.theta_max, self.theta_max, panels.max(MIN_PANELS), &breaks)
            .into_iter()
            .map(|(th, w)| (r * th.sin(), w * scale * th.cos().powi(self.d as i32 - 2)))
            .collect()
    }

    pub fn integrate<G: FnMut(f64) -> f64>(&self, g: G, kinks: &[f64]) -> Result<f64> {
        integrate_rule(&self.rule(kinks, MIN_PANELS), g)
    }
}

pub(crate) fn integrate_rule<G: FnMut(f64) -> f64>(rule: &[(f64, f64)], mut g: G) -> Result<f64> {
    let mut acc = 0.0;
    for &(x, w) in rule {
        let v = g(x);
        if !v.is_finite() {
            return Err(crate::error::Error::NonFinite { x, value: v });
        }
        acc += w * v;
    }
    Ok(acc)
}

pub fn marginal_density(d: usize, x: f64) -> Result<f64> {
    Ok(MarginalMeasure::new(d)?.density(x))
}

/// `E g(<e, x>)` with panel edges at the given kinks.
pub fn quadrature<G: FnMut(f64) -> f64>(d: usize, g: G, kinks: &[f64]) -> Result<f64> {
    MarginalMeasure::new(d)?.integrate(g, kinks)
}
