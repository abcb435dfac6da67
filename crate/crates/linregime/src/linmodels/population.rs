//! Population risk of the random-features model with fixed first-layer weights.
//!
//! For second-layer coefficients `a`, the risk is `|f|^2 - 2 a^T V + a^T U a`
//! with `U_ij = E sigma(<x,w_i>) sigma(<x,w_j>) = h(<w_i,w_j>)` and
//! `V_i = E f(x) sigma(<x,w_i>)`; the minimum is `|f|^2 - V^T U^{-1} V`.

use super::target::{TargetFunction, TargetKind};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::seeding;
use crate::spectrum::{activation_gegenbauer_coeffs, Activation, DotKernel, RfKernel};
use crate::specialfn::{dim_table, GegenbauerEvaluator};
use crate::sphere::sample_sphere_with;
use faer::{Mat, MatRef};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PopulationMethod {
    /// Gegenbauer series for `U` and closed-form projections for `V`.
    Series { max_degree: usize },
    /// Common Monte Carlo draws for `U`, `V` and `|f|^2`.
    MonteCarlo { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationRisk {
    pub risk: f64,
    pub std_error: f64,
    pub norm_sq: f64,
    pub jitter: f64,
}

fn chunk_rows() -> usize {
    4096
}

fn check_weights(w: MatRef<'_, f64>) -> Result<()> {
    for i in 0..w.nrows() {
        let n = (0..w.ncols()).map(|j| w[(i, j)].powi(2)).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-10 {
            return invalid(format!("weight row {i} has norm {n}, expected 1"));
        }
    }
    Ok(())
}

/// `U + jitter I` factored; indefiniteness beyond the jitter is an error.
fn solve_psd(u: &Mat<f64>, rhs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = u.nrows();
    let trace: f64 = (0..n).map(|i| u[(i, i)]).sum();
    let jitter = 1e-10 * trace / n as f64;
    let mut a = u.clone();
    for i in 0..n {
        a[(i, i)] += jitter;
    }
    match a.llt(faer::Side::Lower) {
        Ok(llt) => {
            use faer::linalg::solvers::Solve;
            let out = rhs
                .iter()
                .map(|b| {
                    let x: faer::Col<f64> = llt.solve(faer::ColRef::from_slice(b));
                    x.iter().copied().collect()
                })
                .collect();
            Ok((out, jitter))
        }
        Err(_) => {
            let ev = linalg::sym_eigenvalues(u.as_ref())?;
            let min = ev.first().copied().unwrap_or(0.0);
            Err(Error::Indefinite { eigenvalue: min, jitter })
        }
    }
}

/// Population risks of the best RF predictor for each target, sharing `U`.
///
/// `weights` has unit rows (`theta_i = sqrt(d) w_i`).
pub fn rf_population_risks(
    act: &Activation,
    weights: MatRef<'_, f64>,
    targets: &[&TargetFunction],
    method: PopulationMethod,
) -> Result<Vec<PopulationRisk>> {
    check_weights(weights)?;
    let (nn, d) = (weights.nrows(), weights.ncols());
    if targets.iter().any(|t| t.d != d) {
        return invalid("target dimension does not match the weights");
    }
    match method {
        PopulationMethod::Series { max_degree } => series_risks(act, weights, targets, max_degree),
        PopulationMethod::MonteCarlo { draws, seed } => mc_risks(act, weights, targets, draws, seed, nn, d),
    }
}

pub fn rf_population_risk(
    act: &Activation,
    weights: MatRef<'_, f64>,
    target: &TargetFunction,
    method: PopulationMethod,
) -> Result<PopulationRisk> {
    Ok(rf_population_risks(act, weights, &[target], method)?.remove(0))
}

fn series_risks(
    act: &Activation,
    w: MatRef<'_, f64>,
    targets: &[&TargetFunction],
    max_degree: usize,
) -> Result<Vec<PopulationRisk>> {
    let (nn, d) = (w.nrows(), w.ncols());
    let kernel = RfKernel::new(act, d, max_degree)?;
    let gram: Mat<f64> = w * w.transpose();
    let u = Mat::from_fn(nn, nn, |i, j| if i == j { kernel.at_one() } else { kernel.eval(gram[(i, j)]) });
    let lam = kernel.coeffs();
    let r = (d as f64).sqrt();
    let mut rhs = Vec::with_capacity(targets.len());
    let mut norms = Vec::with_capacity(targets.len());
    for t in targets {
        let norm_sq = t
            .second_moment()
            .ok_or_else(|| Error::InvalidArgument(format!("target {} has no closed-form moments", t.name)))?;
        let v: Vec<f64> = match &t.kind {
            TargetKind::Poly(p) => (0..nn)
                .map(|i| {
                    let theta: Vec<f64> = (0..d).map(|j| r * w[(i, j)]).collect();
                    (0..=3.min(max_degree)).map(|k| lam[k] * p.project(k, &theta)).sum()
                })
                .collect(),
            TargetKind::SingleNeuron { weight, activation }
                if activation.name() == act.name() && activation.shift() == act.shift() =>
            {
                // same activation: V_i = h(<w_*, w_i>) with the tail-folded series used for U
                (0..nn)
                    .map(|i| {
                        let c: f64 = (0..d).map(|j| weight[j] * w[(i, j)]).sum();
                        if (c - 1.0).abs() < 1e-14 { kernel.at_one() } else { kernel.eval(c) }
                    })
                    .collect()
            }
            TargetKind::SingleNeuron { weight, activation } => {
                // V_i = sum_k lambda_k(sigma) lambda_k(sigma_*) B_k Q_k(d <w_*, w_i>)
                let other = activation_gegenbauer_coeffs(activation, d, max_degree)?;
                let dims = dim_table(d, max_degree)?;
                let g = GegenbauerEvaluator::new(d, max_degree)?;
                let mut q = vec![0.0; max_degree + 1];
                (0..nn)
                    .map(|i| {
                        let c: f64 = (0..d).map(|j| weight[j] * w[(i, j)]).sum();
                        g.fill((d as f64 * c).clamp(-(d as f64), d as f64), &mut q);
                        (0..=max_degree).map(|k| lam[k] * other[k] * dims[k] * q[k]).sum()
                    })
                    .collect()
            }
            TargetKind::Custom(_) => {
                return invalid(format!("target {} needs the Monte Carlo route", t.name));
            }
        };
        rhs.push(v);
        norms.push(norm_sq);
    }
    let (sol, jitter) = solve_psd(&u, &rhs)?;
    Ok(rhs
        .iter()
        .zip(&sol)
        .zip(&norms)
        .map(|((v, a), &norm_sq)| PopulationRisk {
            risk: norm_sq - linalg::dot(v, a),
            std_error: 0.0,
            norm_sq,
            jitter,
        })
        .collect())
}

fn mc_risks(
    act: &Activation,
    w: MatRef<'_, f64>,
    targets: &[&TargetFunction],
    draws: usize,
    seed: u64,
    nn: usize,
    d: usize,
) -> Result<Vec<PopulationRisk>> {
    if draws < 2 {
        return invalid("Monte Carlo route needs at least two draws");
    }
    let nt = targets.len();
    let mut u = Mat::<f64>::zeros(nn, nn);
    let mut v = vec![vec![0.0; nn]; nt];
    let mut f2 = vec![0.0; nt];
    let pass = |visit: &mut dyn FnMut(&Mat<f64>, &[Vec<f64>])| {
        let mut rng = seeding::stream(seed, &[seeding::role::MONTE_CARLO]);
        let mut left = draws;
        while left > 0 {
            let m = left.min(chunk_rows());
            let x = sample_sphere_with(m, d, &mut rng);
            let pre: Mat<f64> = &x.points * w.transpose();
            let s = Mat::from_fn(m, nn, |i, j| act.eval(pre[(i, j)]));
            let fv: Vec<Vec<f64>> = targets.iter().map(|t| t.eval_rows(&x)).collect();
            visit(&s, &fv);
            left -= m;
        }
    };
    pass(&mut |s, fv| {
        u += s.transpose() * s;
        for (t, f) in fv.iter().enumerate() {
            let sv = linalg::matvec_t(s.as_ref(), f);
            v[t].iter_mut().zip(&sv).for_each(|(a, b)| *a += b);
            f2[t] += f.iter().map(|x| x * x).sum::<f64>();
        }
    });
    let m = draws as f64;
    u *= faer::Scale(1.0 / m);
    v.iter_mut().for_each(|row| row.iter_mut().for_each(|x| *x /= m));
    let (sol, jitter) = solve_psd(&u, &v)?;
    // second pass over the same draws: residual moments for the standard error
    let mut r1 = vec![0.0; nt];
    let mut r2 = vec![0.0; nt];
    pass(&mut |s, fv| {
        for t in 0..nt {
            let pred = linalg::matvec(s.as_ref(), &sol[t]);
            for (p, f) in pred.iter().zip(&fv[t]) {
                let e = (f - p).powi(2);
                r1[t] += e;
                r2[t] += e * e;
            }
        }
    });
    Ok((0..nt)
        .map(|t| {
            let mean = r1[t] / m;
            let var = (r2[t] / m - mean * mean).max(0.0);
            PopulationRisk {
                risk: f2[t] / m - linalg::dot(&v[t], &sol[t]),
                std_error: (var / m).sqrt(),
                norm_sq: f2[t] / m,
                jitter,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linmodels::features::sample_weights;
    use crate::linmodels::target::unit;

    #[test]
    fn target_in_span_has_zero_risk() {
        let d = 15;
        let act = Activation::shifted_relu(0.5);
        let w = sample_weights(20, d, 1);
        let w0: Vec<f64> = (0..d).map(|j| w[(0, j)]).collect();
        let f = TargetFunction::single_neuron(w0, act.clone()).unwrap();
        let s = rf_population_risk(&act, w.as_ref(), &f, PopulationMethod::Series { max_degree: 40 }).unwrap();
        assert!(s.risk.abs() < 1e-6 * s.norm_sq, "{s:?}");
        let mc = rf_population_risk(&act, w.as_ref(), &f, PopulationMethod::MonteCarlo { draws: 50_000, seed: 3 }).unwrap();
        assert!(mc.risk.abs() <= 3.0 * mc.std_error + 1e-9, "{mc:?}");
    }

    #[test]
    fn series_and_monte_carlo_agree() {
        let d = 10;
        let act = Activation::shifted_relu(0.5);
        let w = sample_weights(30, d, 2);
        let f = TargetFunction::quad_split(d).plus_linear(&unit(d, 2), "q").unwrap();
        let s = rf_population_risk(&act, w.as_ref(), &f, PopulationMethod::Series { max_degree: 60 }).unwrap();
        let mc = rf_population_risk(&act, w.as_ref(), &f, PopulationMethod::MonteCarlo { draws: 200_000, seed: 4 }).unwrap();
        assert!((s.risk - mc.risk).abs() < 0.03 * s.norm_sq, "{s:?} {mc:?}");
        assert!(s.risk > 0.0 && s.risk < s.norm_sq);
    }

    #[test]
    fn monte_carlo_gram_is_symmetric_psd() {
        let d = 6;
        let act = Activation::shifted_relu(0.5);
        let w = sample_weights(12, d, 2);
        let f = TargetFunction::cubic_hermite(d);
        let r = rf_population_risk(&act, w.as_ref(), &f, PopulationMethod::MonteCarlo { draws: 5000, seed: 1 }).unwrap();
        assert!(r.risk >= -1e-9 && r.jitter > 0.0);
    }
}
