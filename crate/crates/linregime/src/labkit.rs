//! Gegenbauer Gram matrices and spectral-norm estimation.

use crate::error::{Error, Result};
use crate::linmodels::sample_weights_with;
use crate::seeding;
use crate::specialfn::GegenbauerEvaluator;
use faer::{Mat, MatRef};
use rand_distr::{Distribution, StandardNormal};

/// `W_ij = Q_k(<theta_i, theta_j>)` for rows of radius `sqrt(d)`.
pub fn gram_gegenbauer(theta: MatRef<'_, f64>, k: usize) -> Result<Mat<f64>> {
    let (n, d) = (theta.nrows(), theta.ncols());
    let g = GegenbauerEvaluator::new(d, k)?;
    let inner: Mat<f64> = theta * theta.transpose();
    let df = d as f64;
    let mut q = vec![0.0; k + 1];
    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        w[(i, i)] = 1.0;
        for j in 0..i {
            g.fill(inner[(i, j)].clamp(-df, df), &mut q);
            w[(i, j)] = q[k];
            w[(j, i)] = q[k];
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpNorm {
    pub value: f64,
    pub iterations: usize,
}

pub const MAX_POWER_ITERATIONS: usize = 10_000;

fn power_run(m: MatRef<'_, f64>, mut v: Vec<f64>, tol: f64) -> Result<OpNorm> {
    let normalize = |v: &mut Vec<f64>| {
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= s);
        s
    };
    if normalize(&mut v) == 0.0 {
        return Ok(OpNorm { value: 0.0, iterations: 0 });
    }
    let mut last = 0.0;
    let mut last_change = f64::INFINITY;
    for it in 1..=MAX_POWER_ITERATIONS {
        let mv = crate::linalg::matvec(m, &v);
        let mut m2v = crate::linalg::matvec(m, &mv);
        // |M v|^2 = v^T M^2 v is the Rayleigh quotient of M^2
        let est = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = normalize(&mut m2v);
        if s == 0.0 {
            return Ok(OpNorm { value: 0.0, iterations: it });
        }
        v = m2v;
        if it > 1 {
            // geometric extrapolation of the remaining error from successive changes
            let change = (est - last).abs();
            let q = (change / last_change).min(0.999);
            if change == 0.0 || (last_change.is_finite() && change * q / (1.0 - q) <= tol * est) {
                return Ok(OpNorm { value: est, iterations: it });
            }
            last_change = change;
        }
        last = est;
    }
    Err(Error::NoConvergence { iterations: MAX_POWER_ITERATIONS, estimate: last })
}

/// Spectral norm of a symmetric matrix by power iteration on `M^2`, from the
/// normalized all-ones vector and from one fixed random restart.
pub fn opnorm(m: MatRef<'_, f64>, tol: f64) -> Result<OpNorm> {
    let n = m.nrows();
    if n == 0 {
        return Ok(OpNorm { value: 0.0, iterations: 0 });
    }
    let a = power_run(m, vec![1.0; n], tol)?;
    let mut rng = seeding::stream(0x6f70_6e6f_726d, &[seeding::role::RESTART, n as u64]);
    let start: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let b = power_run(m, start, tol)?;
    Ok(if b.value > a.value { OpNorm { value: b.value, iterations: a.iterations + b.iterations } } else { OpNorm { value: a.value, iterations: a.iterations + b.iterations } })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramRecord {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub opnorm_deviation: f64,
}

/// `|W - I|_op` for `reps` independent weight draws. Draws depend on
/// `(d, N, rep)` only, so different degrees share the same points.
pub fn gram_diagnostic(d: usize, k: usize, n: usize, reps: usize, seed: u64) -> Result<Vec<GramRecord>> {
    (0..reps)
        .map(|rep| {
            let task_seed = seeding::derive_seed(seed, &[d as u64, n as u64, rep as u64]);
            let mut rng = seeding::stream(task_seed, &[]);
            let mut theta = sample_weights_with(n, d, &mut rng);
            theta *= faer::Scale((d as f64).sqrt());
            let mut w = gram_gegenbauer(theta.as_ref(), k)?;
            for i in 0..n {
                w[(i, i)] -= 1.0;
            }
            Ok(GramRecord { d, k, n, seed: task_seed, opnorm_deviation: opnorm(w.as_ref(), 1e-6)?.value })
        })
        .collect()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s: Vec<f64> = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;

    #[test]
    fn small_cases() {
        let one = Mat::from_fn(1, 5, |_, j| if j == 0 { 5f64.sqrt() } else { 0.0 });
        let w = gram_gegenbauer(one.as_ref(), 3).unwrap();
        assert_eq!((w.nrows(), w[(0, 0)]), (1, 1.0));
        let id = Mat::<f64>::identity(4, 4);
        assert!((opnorm(id.as_ref(), 1e-6).unwrap().value - 1.0).abs() < 1e-12);
        let dg = Mat::from_fn(3, 3, |i, j| if i == j { [3.0, 1.0, -4.0][i] } else { 0.0 });
        assert!((opnorm(dg.as_ref(), 1e-6).unwrap().value - 4.0).abs() < 1e-5);
    }

    #[test]
    fn matches_dense_eigensolve() {
        let mut rng = seeding::stream(12, &[]);
        let a: Mat<f64> = Mat::from_fn(50, 50, |_, _| StandardNormal.sample(&mut rng));
        let m: Mat<f64> = &a + a.transpose();
        let ev = sym_eigenvalues(m.as_ref()).unwrap();
        let want = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let got = opnorm(m.as_ref(), 1e-6).unwrap().value;
        assert!((got / want - 1.0).abs() < 1e-5, "{got} vs {want}");
    }

    #[test]
    fn unit_diagonal_and_symmetry() {
        let mut rng = seeding::stream(1, &[]);
        let mut t = sample_weights_with(30, 20, &mut rng);
        t *= faer::Scale(20f64.sqrt());
        let w = gram_gegenbauer(t.as_ref(), 2).unwrap();
        for i in 0..30 {
            assert_eq!(w[(i, i)], 1.0);
            for j in 0..30 {
                assert_eq!(w[(i, j)], w[(j, i)]);
            }
        }
    }

    #[test]
    fn degree_effect() {
        let k2 = gram_diagnostic(100, 2, 100, 5, 3).unwrap();
        let k3 = gram_diagnostic(100, 3, 100, 5, 3).unwrap();
        let wins = k2.iter().zip(&k3).filter(|(a, b)| b.opnorm_deviation <= a.opnorm_deviation).count();
        assert!(wins >= 4);
        assert!(k2.iter().zip(&k3).all(|(a, b)| a.seed == b.seed));
    }
}
