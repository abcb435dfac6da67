//! Low-degree polynomial projections on the sphere.

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::linmodels::TargetFunction;
use crate::seeding;
use crate::specialfn::{dim_harmonics_f64, GegenbauerEvaluator};
use crate::sphere::sample_sphere_with;
use faer::Mat;

/// Exponent multisets of all monomials of total degree `<= l` in `d` variables,
/// each stored as a nondecreasing list of coordinate indices.
pub fn monomial_basis(d: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..l {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.last().copied().unwrap_or(0);
            for i in start..d {
                let mut v: Vec<usize> = m.clone();
                v.push(i);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// `C(d + l, l)`.
pub fn basis_size(d: usize, l: usize) -> u128 {
    (1..=l as u128).fold(1u128, |acc, i| acc * (d as u128 + i) / i)
}

#[derive(Debug, Clone)]
pub struct LowDegreeFit {
    pub ell: usize,
    pub basis_size: usize,
    pub rank: usize,
    pub coef: Vec<f64>,
    /// `|P_{> l} f|^2` estimated as RSS / (n - rank).
    pub residual_norm_sq: f64,
    pub residual_se: f64,
    /// `|P_{<= l} f|^2` with the same degrees-of-freedom correction.
    pub low_norm_sq: f64,
    /// Sample mean of `f^2` and its standard error.
    pub mean_sq: f64,
    pub mean_sq_se: f64,
    pub n_fit: usize,
}

/// Least-squares fit on all monomials of degree `<= l`.
pub fn project_low_degree(
    target: &TargetFunction,
    l: usize,
    n_fit: usize,
    seed: u64,
    max_entries: u128,
) -> Result<LowDegreeFit> {
    let d = target.d;
    let size = basis_size(d, l);
    if (n_fit as u128) < 5 * size {
        return invalid(format!("n_fit = {n_fit} is below 5 x basis size {size}"));
    }
    if n_fit as u128 * size > max_entries {
        return Err(Error::MemoryCap { entries: n_fit as u128 * size, cap: max_entries });
    }
    let basis = monomial_basis(d, l);
    let x = sample_sphere_with(n_fit, d, &mut seeding::stream(seed, &[]));
    let z = Mat::from_fn(n_fit, basis.len(), |i, c| basis[c].iter().map(|&j| x.points[(i, j)]).product());
    let y = target.eval_rows(&x);
    let (coef, info) = linalg::min_norm_lstsq(z.as_ref(), &y)?;
    let fitted = linalg::matvec(z.as_ref(), &coef);
    let n = n_fit as f64;
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).collect();
    let rss: f64 = resid.iter().sum();
    let dof = (n - info.rank as f64).max(1.0);
    let residual_norm_sq = rss / dof;
    let rmean = rss / n;
    let rvar = resid.iter().map(|r| (r - rmean).powi(2)).sum::<f64>() / (n - 1.0);
    let fit_sq: f64 = fitted.iter().map(|v| v * v).sum();
    let ysq: Vec<f64> = y.iter().map(|v| v * v).collect();
    let mean_sq = ysq.iter().sum::<f64>() / n;
    let var_sq = ysq.iter().map(|v| (v - mean_sq).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(LowDegreeFit {
        ell: l,
        basis_size: basis.len(),
        rank: info.rank,
        coef,
        residual_norm_sq,
        residual_se: (rvar / n).sqrt() * n / dof,
        low_norm_sq: (fit_sq - info.rank as f64 * residual_norm_sq) / n,
        mean_sq,
        mean_sq_se: (var_sq / n).sqrt(),
        n_fit,
    })
}

/// Monte Carlo `(P_k f)(x) = B(d,k) E_y Q_k(<x, y>) f(y)`, returned with its standard error.
pub fn projector_gegenbauer(
    f: &dyn Fn(&[f64]) -> f64,
    d: usize,
    k: usize,
    x: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if x.len() != d || n_mc < 2 {
        return invalid("point dimension mismatch or fewer than two draws");
    }
    let b = dim_harmonics_f64(d, k)?;
    let g = GegenbauerEvaluator::new(d, k)?;
    let mut q = vec![0.0; k + 1];
    let mut rng = seeding::stream(seed, &[]);
    let (mut s1, mut s2) = (0.0, 0.0);
    let chunk = 8192;
    let mut left = n_mc;
    let df = d as f64;
    while left > 0 {
        let m = left.min(chunk);
        let y = sample_sphere_with(m, d, &mut rng);
        let mut row = vec![0.0; d];
        for i in 0..m {
            let mut t = 0.0;
            for (j, r) in row.iter_mut().enumerate() {
                *r = y.points[(i, j)];
                t += *r * x[j];
            }
            g.fill(t.clamp(-df, df), &mut q);
            let v = b * q[k] * f(&row);
            s1 += v;
            s2 += v * v;
        }
        left -= m;
    }
    let n = n_mc as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::sample_sphere;

    #[test]
    fn basis_counts() {
        for (d, l) in [(3, 2), (5, 3), (30, 2)] {
            assert_eq!(monomial_basis(d, l).len() as u128, basis_size(d, l));
        }
        assert_eq!(basis_size(50, 3), 23426);
    }

    #[test]
    fn undersampled_rejected() {
        let f = TargetFunction::quad_split(10);
        assert!(project_low_degree(&f, 2, 100, 1, u128::MAX).is_err());
        assert!(project_low_degree(&f, 1, 1000, 1, 10).is_err());
    }

    #[test]
    fn quadratic_target_examples() {
        let d = 10;
        let f = TargetFunction::quad_split(d);
        let norm = f.second_moment().unwrap();
        let two = project_low_degree(&f, 2, 20_000, 2, u128::MAX).unwrap();
        assert!(two.residual_norm_sq <= 1e-2 * norm);
        let one = project_low_degree(&f, 1, 200_000, 3, u128::MAX).unwrap();
        assert!((one.residual_norm_sq / norm - 1.0).abs() < 0.02, "{}", one.residual_norm_sq / norm);
    }

    #[test]
    fn cubic_target_linear_part() {
        let d = 10;
        let f = TargetFunction::cubic_hermite(d);
        let fit = project_low_degree(&f, 1, 200_000, 4, u128::MAX).unwrap();
        let want = -6.0 / (d as f64 + 2.0);
        for c in &fit.coef[1..] {
            assert!((c - want).abs() < 0.03, "{c} vs {want}");
        }
        let low = f.degree_norms(1).unwrap()[1];
        assert!((fit.low_norm_sq - low).abs() < 0.05 + 3.0 * fit.residual_se);
    }

    #[test]
    fn projector_examples() {
        let d = 10;
        let x = sample_sphere(1, d, 5).unwrap().row(0);
        let f = |y: &[f64]| y[0] * y[1];
        let (v, se) = projector_gegenbauer(&f, d, 2, &x, 1_000_000, 6).unwrap();
        assert!((v - x[0] * x[1]).abs() < 3.0 * se, "{v} vs {} (se {se})", x[0] * x[1]);
        let g = |y: &[f64]| y[0];
        let (v, se) = projector_gegenbauer(&g, d, 1, &x, 400_000, 7).unwrap();
        assert!((v - x[0]).abs() < 3.0 * se);
        let (m, _) = projector_gegenbauer(&g, d, 0, &x, 1000, 8).unwrap();
        let ys = sample_sphere_with(1000, d, &mut seeding::stream(8, &[]));
        let mean = (0..1000).map(|i| ys.points[(i, 0)]).sum::<f64>() / 1000.0;
        assert!((m - mean).abs() < 1e-12);
    }
}
