//! Dense least squares and symmetric solves over faer.

use crate::error::{Error, Result};
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::householder;
use faer::linalg::solvers::Solve;
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Col, ColRef, Conj, Mat, MatRef, Par, Side};

/// Relative singular-value cutoff for minimum-norm solutions.
pub const RCOND: f64 = 1e-10;

pub fn matvec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    let y: Col<f64> = a * ColRef::from_slice(x);
    y.iter().copied().collect()
}

pub fn matvec_t(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    let y: Col<f64> = a.transpose() * ColRef::from_slice(x);
    y.iter().copied().collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Diagnostics of a minimum-norm solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqInfo {
    pub rank: usize,
    /// Absolute singular-value threshold; zero when the triangular path was taken.
    pub cutoff: f64,
    /// `sigma_min / sigma_max` estimate of the triangular factor.
    pub rcond_estimate: f64,
    pub used_svd: bool,
}

fn upper_solve(r: MatRef<'_, f64>, b: &mut [f64]) {
    let n = b.len();
    solve_upper_triangular_in_place(r, faer::MatMut::from_column_major_slice_mut(b, n, 1), Par::Seq);
}

fn upper_t_solve(r: MatRef<'_, f64>, b: &mut [f64]) {
    let n = b.len();
    solve_lower_triangular_in_place(r.transpose(), faer::MatMut::from_column_major_slice_mut(b, n, 1), Par::Seq);
}

/// Power-iteration estimate of `sigma_min / sigma_max` for an upper-triangular factor.
fn rcond_upper(r: MatRef<'_, f64>) -> f64 {
    let n = r.nrows();
    if n == 0 {
        return 1.0;
    }
    if (0..n).any(|i| r[(i, i)] == 0.0 || !r[(i, i)].is_finite()) {
        return 0.0;
    }
    let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract()).collect();
    let normalize = |v: &mut Vec<f64>| {
        let s = norm(v);
        v.iter_mut().for_each(|x| *x /= s);
        s
    };
    let mut v = start.clone();
    normalize(&mut v);
    let mut smax2 = 0.0;
    for _ in 0..30 {
        let w = matvec(r, &v);
        v = matvec_t(r, &w);
        smax2 = normalize(&mut v);
    }
    let mut v = start;
    normalize(&mut v);
    let mut inv2 = 0.0;
    for _ in 0..30 {
        upper_t_solve(r, &mut v);
        upper_solve(r, &mut v);
        inv2 = normalize(&mut v);
        if !inv2.is_finite() {
            return 0.0;
        }
    }
    if smax2 <= 0.0 || inv2 <= 0.0 {
        return 0.0;
    }
    (1.0 / (inv2 * smax2)).sqrt()
}

fn with_stack<R>(req: faer::dyn_stack::StackReq, f: impl FnOnce(&mut MemStack) -> R) -> R {
    let mut buf = MemBuffer::new(req);
    f(MemStack::new(&mut buf))
}

/// Minimum-norm least-squares solution of `min |y - Z a|`.
///
/// Factors the tall orientation (`Z` or `Z^T`) by Householder QR. When the
/// triangular factor is well conditioned the solution follows from triangular
/// solves; otherwise from an SVD of the factor with relative cutoff `RCOND`.
pub fn min_norm_lstsq(z: MatRef<'_, f64>, y: &[f64]) -> Result<(Vec<f64>, LstsqInfo)> {
    let (n, p) = (z.nrows(), z.ncols());
    if y.len() != n {
        return Err(Error::InvalidArgument(format!("rhs length {} does not match {n} rows", y.len())));
    }
    if n == 0 || p == 0 {
        return Ok((vec![0.0; p], LstsqInfo { rank: 0, cutoff: 0.0, rcond_estimate: 1.0, used_svd: false }));
    }
    let tall = n >= p;
    let a = if tall { z.to_owned() } else { z.transpose().to_owned() };
    let m = a.nrows();
    let r_dim = a.ncols();
    let qr = a.qr();
    let basis = qr.Q_basis();
    let coeff = qr.Q_coeff();
    let r = qr.thin_R();
    let rc = rcond_upper(r);
    // the inverse-iteration estimate can only overstate sigma_min, so keep a margin
    let triangular = rc > 10.0 * RCOND;

    let solve_core = |rhs: &mut Vec<f64>| -> Result<(usize, f64)> {
        // rhs has length r_dim; returns (rank, cutoff)
        if triangular {
            if tall {
                upper_solve(r, rhs);
            } else {
                upper_t_solve(r, rhs);
            }
            return Ok((r_dim, 0.0));
        }
        let svd = r.thin_svd().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let s = svd.S().column_vector();
        let smax = s.iter().copied().fold(0.0, f64::max);
        let cutoff = RCOND * smax;
        // R = U S V^T: tall uses R^+ = V S^+ U^T, wide uses (R^T)^+ = U S^+ V^T
        let (left, right) = if tall { (svd.V(), svd.U()) } else { (svd.U(), svd.V()) };
        let mut proj = matvec_t(right, rhs);
        let mut rank = 0;
        for (i, v) in proj.iter_mut().enumerate() {
            if s[i] > cutoff {
                *v /= s[i];
                rank += 1;
            } else {
                *v = 0.0;
            }
        }
        *rhs = matvec(left, &proj);
        Ok((rank, cutoff))
    };

    let blocksize = coeff.nrows();
    let (coef, rank, cutoff) = if tall {
        let mut c = y.to_vec();
        with_stack(
            householder::apply_block_householder_sequence_transpose_on_the_left_in_place_scratch::<f64>(m, blocksize, 1),
            |stack| {
                householder::apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj(
                    basis,
                    coeff,
                    Conj::No,
                    faer::MatMut::from_column_major_slice_mut(&mut c, m, 1),
                    Par::Seq,
                    stack,
                )
            },
        );
        c.truncate(r_dim);
        let (rank, cutoff) = solve_core(&mut c)?;
        (c, rank, cutoff)
    } else {
        let mut c = y.to_vec();
        let (rank, cutoff) = solve_core(&mut c)?;
        c.resize(m, 0.0);
        with_stack(
            householder::apply_block_householder_sequence_on_the_left_in_place_scratch::<f64>(m, blocksize, 1),
            |stack| {
                householder::apply_block_householder_sequence_on_the_left_in_place_with_conj(
                    basis,
                    coeff,
                    Conj::No,
                    faer::MatMut::from_column_major_slice_mut(&mut c, m, 1),
                    Par::Seq,
                    stack,
                )
            },
        );
        (c, rank, cutoff)
    };
    if coef.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { condition: 1.0 / rc.max(f64::MIN_POSITIVE) });
    }
    Ok((coef, LstsqInfo { rank, cutoff, rcond_estimate: rc, used_svd: !triangular }))
}

/// `Z^T Z`.
pub fn gram(z: MatRef<'_, f64>) -> Mat<f64> {
    z.transpose() * z
}

/// Solve `A x = b` for symmetric positive definite `A`.
pub fn spd_solve(a: MatRef<'_, f64>, b: &[f64]) -> Result<Vec<f64>> {
    let llt = a
        .llt(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("Cholesky failed: {e:?}")))?;
    let x: Col<f64> = llt.solve(ColRef::from_slice(b));
    Ok(x.iter().copied().collect())
}

/// Eigenvalues of a symmetric matrix in nondecreasing order.
pub fn sym_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("eigensolver failed: {e:?}")))
}

/// Ridge solution of `(Z^T Z + penalty I) a = Z^T y`, through the smaller of
/// the primal `p x p` and dual `n x n` systems.
pub fn ridge_solve(z: MatRef<'_, f64>, y: &[f64], penalty: f64) -> Result<Vec<f64>> {
    if penalty < 0.0 || !penalty.is_finite() {
        return Err(Error::InvalidArgument(format!("penalty {penalty} must be finite and nonnegative")));
    }
    if penalty == 0.0 {
        return Ok(min_norm_lstsq(z, y)?.0);
    }
    let (n, p) = (z.nrows(), z.ncols());
    if p <= n {
        let mut g = gram(z);
        for i in 0..p {
            g[(i, i)] += penalty;
        }
        spd_solve(g.as_ref(), &matvec_t(z, y))
    } else {
        let mut k: Mat<f64> = z * z.transpose();
        for i in 0..n {
            k[(i, i)] += penalty;
        }
        let c = spd_solve(k.as_ref(), y)?;
        Ok(matvec_t(z, &c))
    }
}
