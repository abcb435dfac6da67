//! Gegenbauer and Hermite polynomials, harmonic subspace dimensions, and the
//! sphere-to-Gaussian coefficient correspondence.
//!
//! `Q_k^{(d)}` is normalized so that `Q_k(d) = 1` and takes its argument on
//! `[-d, d]` (an inner product of two points of radius `sqrt(d)`).

use crate::error::{invalid, Error, Result};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Recurrence weights `(s_k, t_k)` in `(t/d) Q_k = s_k Q_{k-1} + t_k Q_{k+1}`.
///
/// At `k = 0` the pair is `(0, 1)`, which matches `Q_1(t) = t/d`.
pub fn recurrence_coeffs(d: usize, k: usize) -> (f64, f64) {
    if k == 0 {
        return (0.0, 1.0);
    }
    let den = (2 * k + d - 2) as f64;
    (k as f64 / den, (k + d - 2) as f64 / den)
}

#[derive(Debug, Clone)]
pub struct GegenbauerEvaluator {
    d: usize,
    max_degree: usize,
    s: Vec<f64>,
    t: Vec<f64>,
}

impl GegenbauerEvaluator {
    pub fn new(d: usize, max_degree: usize) -> Result<Self> {
        if d < 2 {
            return invalid(format!("dimension d = {d} must be at least 2"));
        }
        let (s, t) = (0..=max_degree).map(|k| recurrence_coeffs(d, k)).unzip();
        Ok(Self { d, max_degree, s, t })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check(&self, t: f64) -> Result<()> {
        let bound = self.d as f64;
        if !(t.abs() <= bound * (1.0 + 1e-12)) {
            return Err(Error::Domain { value: t, lo: -bound, hi: bound });
        }
        Ok(())
    }

    /// Fills `out[k] = Q_k(t)` for `k < out.len()` without a domain check.
    pub fn fill(&self, t: f64, out: &mut [f64]) {
        let m = out.len();
        if m == 0 {
            return;
        }
        out[0] = 1.0;
        if m == 1 {
            return;
        }
        let u = t / self.d as f64;
        out[1] = u;
        for k in 1..m - 1 {
            let (s, tk) = if k <= self.max_degree { (self.s[k], self.t[k]) } else { recurrence_coeffs(self.d, k) };
            out[k + 1] = (u * out[k] - s * out[k - 1]) / tk;
        }
    }

    /// `Q_0(t), ..., Q_K(t)`.
    pub fn eval_all(&self, t: f64) -> Result<Vec<f64>> {
        self.check(t)?;
        let mut out = vec![0.0; self.max_degree + 1];
        self.fill(t, &mut out);
        Ok(out)
    }

    pub fn eval(&self, k: usize, t: f64) -> Result<f64> {
        if k > self.max_degree {
            return invalid(format!("degree {k} above evaluator maximum {}", self.max_degree));
        }
        self.check(t)?;
        let mut out = vec![0.0; k + 1];
        self.fill(t, &mut out);
        Ok(out[k])
    }
}

/// `Q_k^{(d)}(t)` by upward recurrence.
pub fn gegenbauer_eval(d: usize, k: usize, t: f64) -> Result<f64> {
    GegenbauerEvaluator::new(d, k)?.eval(k, t)
}

/// Probabilists' Hermite polynomials.
#[derive(Debug, Clone, Copy)]
pub struct HermiteEvaluator {
    max_degree: usize,
}

impl HermiteEvaluator {
    pub fn new(max_degree: usize) -> Self {
        Self { max_degree }
    }

    pub fn fill(x: f64, out: &mut [f64]) {
        let m = out.len();
        if m == 0 {
            return;
        }
        out[0] = 1.0;
        if m > 1 {
            out[1] = x;
        }
        for k in 1..m.saturating_sub(1) {
            out[k + 1] = x * out[k] - k as f64 * out[k - 1];
        }
    }

    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.max_degree + 1];
        Self::fill(x, &mut out);
        out
    }
}

pub fn hermite_eval(k: usize, x: f64) -> f64 {
    let mut out = vec![0.0; k + 1];
    HermiteEvaluator::fill(x, &mut out);
    out[k]
}

/// Exact `B(d, k)`, the dimension of degree-`k` spherical harmonics on `S^{d-1}`.
pub fn dim_harmonics_exact(d: usize, k: usize) -> Result<BigUint> {
    if d < 2 {
        return invalid(format!("dimension d = {d} must be at least 2"));
    }
    if k == 0 {
        return Ok(BigUint::from(1u32));
    }
    // C(k + d - 3, k - 1), built so every intermediate quotient is exact
    let n = k + d - 3;
    let mut c = BigUint::from(1u32);
    for i in 0..k - 1 {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    Ok(c * BigUint::from(2 * k + d - 2) / BigUint::from(k))
}

/// `B(d, k)` as a native integer; overflow is an error, never a wrap.
pub fn dim_harmonics(d: usize, k: usize) -> Result<u128> {
    dim_harmonics_exact(d, k)?
        .to_u128()
        .ok_or_else(|| Error::Overflow(format!("B({d}, {k}) exceeds u128")))
}

/// `B(d, k)` as a float, rounded from the exact value.
pub fn dim_harmonics_f64(d: usize, k: usize) -> Result<f64> {
    let b = dim_harmonics_exact(d, k)?;
    Ok(b.to_f64().unwrap_or(f64::INFINITY))
}

/// Table `B(d, 0..=max_degree)` as floats.
pub fn dim_table(d: usize, max_degree: usize) -> Result<Vec<f64>> {
    if d < 2 {
        return invalid(format!("dimension d = {d} must be at least 2"));
    }
    let mut out = Vec::with_capacity(max_degree + 1);
    for k in 0..=max_degree {
        out.push(dim_harmonics_f64(d, k)?);
    }
    Ok(out)
}

/// Monomial coefficients (ascending powers of `x`) of `Q_k(sqrt(d) x)`.
pub fn gegenbauer_monomials(d: usize, k: usize) -> Result<Vec<f64>> {
    if d < 2 {
        return invalid(format!("dimension d = {d} must be at least 2"));
    }
    let r = 1.0 / (d as f64).sqrt();
    let mut prev = vec![1.0];
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = vec![0.0, r];
    for j in 1..k {
        let (s, t) = recurrence_coeffs(d, j);
        let mut next = vec![0.0; j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += r * c / t;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= s * c / t;
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Monomial coefficients of `He_k(x)`.
pub fn hermite_monomials(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for j in 1..k {
        let mut next = vec![0.0; j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= j as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

pub const GAP_MAX_DEGREE: usize = 12;
pub const GAP_MAX_DIM: usize = 2000;

/// Max-norm distance between the coefficients of `sqrt(B(d,k)) Q_k(sqrt(d) x)`
/// and of `He_k(x) / sqrt(k!)`.
pub fn gegenbauer_hermite_gap(d: usize, k: usize) -> Result<f64> {
    if k > GAP_MAX_DEGREE || d > GAP_MAX_DIM {
        return Err(Error::Overflow(format!(
            "coefficient expansion for (d = {d}, k = {k}) outside d <= {GAP_MAX_DIM}, k <= {GAP_MAX_DEGREE}"
        )));
    }
    let scale = dim_harmonics_f64(d, k)?.sqrt();
    let q = gegenbauer_monomials(d, k)?;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let he = hermite_monomials(k);
    Ok(q
        .iter()
        .zip(&he)
        .map(|(a, b)| (a * scale - b / fact.sqrt()).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(gegenbauer_eval(30, 0, 7.3).unwrap(), 1.0);
        assert!(close(gegenbauer_eval(30, 1, 6.0).unwrap(), 0.2, 1e-15));
        for &t in &[-10.0, -3.2, 0.0, 1.7, 9.99, 10.0] {
            let want = (t * t - 10.0) / (10.0 * 9.0);
            assert!(close(gegenbauer_eval(10, 2, t).unwrap(), want, 1e-14));
        }
    }

    #[test]
    fn endpoint_normalization() {
        for d in [2, 3, 5, 30, 400] {
            let g = GegenbauerEvaluator::new(d, 40).unwrap();
            for (k, v) in g.eval_all(d as f64).unwrap().into_iter().enumerate() {
                assert!(close(v, 1.0, 1e-12), "d={d} k={k} v={v}");
            }
        }
    }

    #[test]
    fn circle_case_is_chebyshev() {
        for &t in &[-1.9, -0.4, 0.3, 1.2] {
            let th = (t / 2.0f64).acos();
            for k in 0..10 {
                assert!(close(gegenbauer_eval(2, k, t).unwrap(), (k as f64 * th).cos(), 1e-12));
            }
        }
    }

    #[test]
    fn domain_and_dimension_errors() {
        assert!(matches!(gegenbauer_eval(10, 3, 10.5), Err(Error::Domain { .. })));
        assert!(gegenbauer_eval(10, 3, 10.0 * (1.0 + 1e-13)).is_ok());
        assert!(matches!(gegenbauer_eval(1, 3, 0.5), Err(Error::InvalidArgument(_))));
        assert!(gegenbauer_eval(10, 3, f64::NAN).is_err());
    }

    #[test]
    fn recurrence_residual_on_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for d in [5usize, 10, 50, 100] {
            let g = GegenbauerEvaluator::new(d, 11).unwrap();
            for _ in 0..200 {
                let t = rng.gen_range(-(d as f64)..=d as f64);
                let q = g.eval_all(t).unwrap();
                for k in 1..=10 {
                    let (s, tk) = recurrence_coeffs(d, k);
                    let r = (t / d as f64) * q[k] - s * q[k - 1] - tk * q[k + 1];
                    assert!(r.abs() <= 1e-10 * q[k].abs().max(1.0));
                }
            }
        }
    }

    // Closed-form derivative route: with a = k + (d-3)/2 and u = 1 - t^2/d^2,
    // (d/dt)^k u^a = P_k(t) u^{a-k}, P_{j+1} = P_j' u + P_j (a - j)(-2t/d^2).
    fn rodrigues(d: usize, k: usize, t: f64) -> f64 {
        let df = d as f64;
        let a = k as f64 + (df - 3.0) / 2.0;
        let mut p = vec![1.0];
        for j in 0..k {
            let mut next = vec![0.0; p.len() + 2];
            for (i, c) in p.iter().enumerate() {
                if i > 0 {
                    next[i - 1] += i as f64 * c;
                    next[i + 1] -= i as f64 * c / (df * df);
                }
                next[i + 1] += c * (a - j as f64) * (-2.0 / (df * df));
            }
            p = next;
        }
        let poly: f64 = p.iter().rev().fold(0.0, |acc, c| acc * t + c);
        let h = (df - 1.0) / 2.0;
        let pref = (-0.5f64).powi(k as i32) * df.powi(k as i32) * (libm::lgamma(h) - libm::lgamma(k as f64 + h)).exp();
        pref * poly
    }

    #[test]
    fn rodrigues_cross_check() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for d in [3usize, 4, 7, 12, 30] {
            for k in 0..=4 {
                for _ in 0..20 {
                    let t = rng.gen_range(-(d as f64)..=d as f64);
                    let a = gegenbauer_eval(d, k, t).unwrap();
                    let b = rodrigues(d, k, t);
                    assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-3), "d={d} k={k} t={t}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_eval(0, 2.7), 1.0);
        for &x in &[-1.5, 0.0, 0.4, 3.0] {
            assert!(close(hermite_eval(2, x), x * x - 1.0, 1e-15));
            assert!(close(hermite_eval(3, x), x * x * x - 3.0 * x, 1e-15));
        }
    }

    #[test]
    fn harmonic_dimensions() {
        for d in 2..60 {
            assert_eq!(dim_harmonics(d, 0).unwrap(), 1);
            assert_eq!(dim_harmonics(d, 1).unwrap(), d as u128);
        }
        for k in 0..10 {
            assert_eq!(dim_harmonics(3, k).unwrap(), 2 * k as u128 + 1);
        }
        assert_eq!(dim_harmonics(30, 2).unwrap(), 464);
        assert_eq!(dim_harmonics(2, 7).unwrap(), 2);
        assert!(dim_harmonics(1, 2).is_err());
    }

    #[test]
    fn harmonic_dimension_overflow_is_reported() {
        assert!(matches!(dim_harmonics(1000, 20), Err(Error::Overflow(_))));
        let exact = dim_harmonics_exact(1000, 20).unwrap();
        let f = dim_harmonics_f64(1000, 20).unwrap();
        assert!(f.is_finite() && f > 1e38);
        assert_eq!(exact.to_f64().unwrap(), f);
    }

    #[test]
    fn harmonic_dimension_monotone_in_degree() {
        for d in 2..=200 {
            let t = dim_table(d, 20).unwrap();
            assert!(t.windows(2).all(|w| w[1] >= w[0]), "d={d}");
        }
    }

    #[test]
    fn dimension_sum_counts_polynomials() {
        // degree <= l polynomials on the sphere: C(d+l-1, l) + C(d+l-2, l-1)
        let d = 7;
        let total: u128 = (0..=4).map(|k| dim_harmonics(d, k).unwrap()).sum();
        assert_eq!(total, 210 + 84);
    }

    #[test]
    fn hermite_gap_examples() {
        for d in [5, 20, 320] {
            assert_eq!(gegenbauer_hermite_gap(d, 0).unwrap(), 0.0);
            assert!(gegenbauer_hermite_gap(d, 1).unwrap() < 1e-14);
        }
        for k in 2..=5 {
            let g: Vec<f64> = [20, 80, 320].iter().map(|&d| gegenbauer_hermite_gap(d, k).unwrap()).collect();
            assert!(g[0] > g[1] && g[1] > g[2], "k={k}: {g:?}");
        }
        assert!(gegenbauer_hermite_gap(2001, 3).is_err());
        assert!(gegenbauer_hermite_gap(50, 13).is_err());
    }

    proptest! {
        #[test]
        fn bounded_by_one(d in 2usize..300, k in 0usize..30, u in -1.0f64..=1.0) {
            let t = u * d as f64;
            let v = gegenbauer_eval(d, k, t).unwrap();
            prop_assert!(v.abs() <= 1.0 + 1e-9);
        }

        #[test]
        fn parity(d in 2usize..100, k in 0usize..20, u in 0.0f64..=1.0) {
            let t = u * d as f64;
            let a = gegenbauer_eval(d, k, t).unwrap();
            let b = gegenbauer_eval(d, k, -t).unwrap();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - sign * b).abs() <= 1e-12);
        }

        #[test]
        fn hermite_derivative_identity(k in 1usize..15, x in -4.0f64..4.0) {
            // He_k' = k He_{k-1}, checked against a central difference
            let h = 1e-5;
            let num = (hermite_eval(k, x + h) - hermite_eval(k, x - h)) / (2.0 * h);
            let want = k as f64 * hermite_eval(k - 1, x);
            prop_assert!((num - want).abs() <= 1e-5 * want.abs().max(1.0));
        }
    }
}
