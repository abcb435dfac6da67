//! Approximation-error staircase, spectrum dumps and Gram diagnostics.

use super::config::{ExperimentConfig, ModelChoice};
use super::record::{SpectrumRow, StaircaseRecord};
use super::sweep::{build_kernel, repetition_seed, run_tasks, test_inputs, training_inputs, weight_stream};
use crate::error::{invalid, Result};
use crate::labkit::{gram_diagnostic, median, GramRecord};
use crate::linalg;
use crate::linmodels::{
    fit_minnorm, rf_population_risk, risk_on, sample_weights_with, FeatureModel, ModelKind, PopulationMethod,
    TargetFunction,
};
use crate::seeding::{self, role};
use crate::spectrum::Activation;
use std::collections::BTreeMap;

/// Monte Carlo draws for population risks of targets without closed-form projections.
pub const STAIRCASE_MC_DRAWS: usize = 100_000;

/// Population approximation risk of the RF model (series or Monte Carlo
/// `U, V` system), or, for NT, the test risk of a min-norm fit on
/// `n_factor * p` samples. One record per `(d, N, repetition)`.
pub fn run_staircase(cfg: &ExperimentConfig) -> Result<Vec<StaircaseRecord>> {
    cfg.validate()?;
    if !matches!(cfg.model, ModelChoice::Rf | ModelChoice::Nt) {
        return invalid("staircase supports model = rf or nt");
    }
    let mut tasks = Vec::new();
    for &d in &cfg.d {
        TargetFunction::by_name(&cfg.target, d)?;
        for &neurons in &cfg.neurons {
            for rep in 0..cfg.repetitions {
                tasks.push((d, neurons, rep));
            }
        }
    }
    run_tasks(cfg.threads, &tasks, |&(d, neurons, rep)| staircase_point(cfg, d, neurons, rep)).into_iter().collect()
}

fn staircase_point(cfg: &ExperimentConfig, d: usize, neurons: usize, rep: usize) -> Result<StaircaseRecord> {
    let rep_seed = repetition_seed(cfg.seed, rep);
    let target = TargetFunction::by_name(&cfg.target, d)?;
    let act = Activation::shifted_relu(cfg.u0);
    let w = sample_weights_with(neurons, d, &mut weight_stream(rep_seed, d, neurons));
    let (p, risk, std_error, norm) = match cfg.model {
        ModelChoice::Rf => {
            let method = if target.as_poly().is_some() {
                PopulationMethod::Series { max_degree: cfg.max_degree }
            } else {
                let seed = seeding::derive_seed(rep_seed, &[role::MONTE_CARLO, d as u64, neurons as u64]);
                PopulationMethod::MonteCarlo { draws: STAIRCASE_MC_DRAWS, seed }
            };
            let r = rf_population_risk(&act, w.as_ref(), &target, method)?;
            (neurons, r.risk, r.std_error, r.norm_sq)
        }
        _ => {
            let model = FeatureModel::new(ModelKind::Nt, w, act)?;
            let p = model.num_params();
            let n = (cfg.n_factor * p as f64).ceil() as usize;
            let x = training_inputs(rep_seed, d, n);
            let z = model.design(&x, cfg.max_entries)?;
            let fit = fit_minnorm(z.as_ref(), &target.eval_rows(&x))?;
            drop(z);
            let x_test = test_inputs(rep_seed, d, cfg.n_test);
            let z_test = model.design(&x_test, cfg.max_entries)?;
            let r = risk_on(&linalg::matvec(z_test.as_ref(), &fit.coef), &target, &x_test);
            (p, r.test_mse, r.std_error, r.r0)
        }
    };
    Ok(StaircaseRecord {
        model: cfg.model.label().into(),
        target: cfg.target.clone(),
        d,
        neurons,
        p,
        log_p_over_log_d: (p as f64).ln() / (d as f64).ln(),
        risk,
        normalized_risk: risk / norm,
        std_error,
        seed: rep_seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaircasePoint {
    pub model: String,
    pub d: usize,
    pub neurons: usize,
    pub p: usize,
    pub log_p_over_log_d: f64,
    pub median_normalized_risk: f64,
}

/// Median normalized risk per `(model, d, N)`, in grid order.
pub fn staircase_medians(records: &[StaircaseRecord]) -> Vec<StaircasePoint> {
    let mut groups: BTreeMap<(String, usize, usize), (usize, f64, Vec<f64>)> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.model.clone(), r.d, r.neurons))
            .or_insert_with(|| (r.p, r.log_p_over_log_d, Vec::new()))
            .2
            .push(r.normalized_risk);
    }
    groups
        .into_iter()
        .map(|((model, d, neurons), (p, x, v))| StaircasePoint {
            model,
            d,
            neurons,
            p,
            log_p_over_log_d: x,
            median_normalized_risk: median(&v),
        })
        .collect()
}

/// Kernel eigenvalues `xi_k` and multiplicities for each configured `d`.
pub fn spectrum_rows(cfg: &ExperimentConfig) -> Result<Vec<SpectrumRow>> {
    let mut rows = Vec::new();
    for &d in &cfg.d {
        let (_, spec) = build_kernel(cfg.kernel, cfg.u0, d, cfg.max_degree)?;
        for k in 0..=spec.max_degree() {
            rows.push(SpectrumRow { d, k, xi: spec.xi[k], b: spec.dims[k] });
        }
    }
    Ok(rows)
}

/// `|W - I|_op` over the `(d, degree, N)` grid with `repetitions` draws each.
pub fn gram_rows(cfg: &ExperimentConfig) -> Result<Vec<GramRecord>> {
    let mut tasks = Vec::new();
    for &d in &cfg.d {
        for &k in &cfg.degree {
            for &n in &cfg.neurons {
                tasks.push((d, k, n));
            }
        }
    }
    let out: Result<Vec<Vec<GramRecord>>> =
        run_tasks(cfg.threads, &tasks, |&(d, k, n)| gram_diagnostic(d, k, n, cfg.repetitions, cfg.seed)).into_iter().collect();
    Ok(out?.into_iter().flatten().collect())
}
