//! Sweep execution: one task per `(d, N, repetition)`, records in grid order.

use super::config::{ExperimentConfig, KernelChoice, LambdaUnits, ModelChoice, ScalingChoice, Solver};
use super::record::{errors_path, write_csv_file, RunRecord, RUN_HEADER};
use crate::error::Result;
use crate::krr::{assemble_kernel, cross_kernel, krr_fit, KernelMatrix, KrrOptions, DEFAULT_MAX_KERNEL_ROWS};
use crate::linalg;
use crate::linmodels::{
    fit_minnorm, fit_ridge, mse, risk_on, sample_weights_with, sparse_nn_weights_with, FeatureModel, ModelKind,
    RidgeScaling, TargetFunction,
};
use crate::seeding::{self, role, Stream};
use crate::spectrum::{Activation, DotKernel, KernelSpectrum, NtKernel, RfKernel};
use crate::sphere::{sample_sphere_with, SphereSample};
use faer::Mat;
use rand_distr::{Distribution, StandardNormal};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

/// Runs `f` over `items` on a pool of `threads` workers (0 = default),
/// returning results in input order.
pub fn run_tasks<T: Sync, R: Send>(threads: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build();
        match pool {
            Ok(p) => p.install(|| items.par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("thread pool unavailable ({e}); running serially");
                items.iter().map(f).collect()
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        items.iter().map(f).collect()
    }
}

/// Seed written to the `seed` column and used as the root of a repetition's streams.
pub fn repetition_seed(master: u64, rep: usize) -> u64 {
    seeding::derive_seed(master, &[rep as u64])
}

/// Training inputs for `(d, repetition)`, shared across widths, sizes and
/// penalties so risk curves use common random numbers.
pub fn training_inputs(rep_seed: u64, d: usize, n: usize) -> SphereSample {
    sample_sphere_with(n, d, &mut seeding::stream(rep_seed, &[role::TRAIN, d as u64]))
}

pub fn test_inputs(rep_seed: u64, d: usize, n: usize) -> SphereSample {
    sample_sphere_with(n, d, &mut seeding::stream(rep_seed, &[role::TEST, d as u64]))
}

pub fn weight_stream(rep_seed: u64, d: usize, neurons: usize) -> Stream {
    seeding::stream(rep_seed, &[role::WEIGHTS, d as u64, neurons as u64])
}

pub fn labels(target: &TargetFunction, x: &SphereSample, tau: f64, rep_seed: u64) -> Vec<f64> {
    let mut rng = seeding::stream(rep_seed, &[role::NOISE, x.dim() as u64]);
    let f = target.eval_rows(x);
    if tau == 0.0 {
        return f;
    }
    f.into_iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(&mut rng);
            v + tau * e
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Task {
    d: usize,
    neurons: usize,
    rep: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub records: Vec<RunRecord>,
    /// One line per failed task; the task's rows carry NaN measurements.
    pub errors: Vec<String>,
}

impl SweepOutput {
    /// Writes the CSV and, when tasks failed, the `<out>.errors` sidecar.
    pub fn write(&self, out: &Path) -> Result<()> {
        write_csv_file(out, RUN_HEADER, &self.records)?;
        let side = errors_path(out);
        if self.errors.is_empty() {
            if side.exists() {
                std::fs::remove_file(side)?;
            }
        } else {
            std::fs::write(side, self.errors.join("\n") + "\n")?;
        }
        Ok(())
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    // targets are checked up front so a typo is a config error, not a column of NaN
    for &d in &cfg.d {
        TargetFunction::by_name(&cfg.target, d)?;
    }
    let widths: Vec<usize> = if cfg.model == ModelChoice::Krr { vec![0] } else { cfg.neurons.clone() };
    let mut tasks = Vec::new();
    for &d in &cfg.d {
        for &neurons in &widths {
            for rep in 0..cfg.repetitions {
                tasks.push(Task { d, neurons, rep });
            }
        }
    }
    let results = run_tasks(cfg.threads, &tasks, |t| {
        let out = if cfg.model == ModelChoice::Krr { krr_task(cfg, t) } else { feature_task(cfg, t) };
        (t.clone(), out)
    });
    let mut output = SweepOutput::default();
    for (t, res) in results {
        match res {
            Ok(mut rows) => output.records.append(&mut rows),
            Err(e) => {
                output.errors.push(format!("model={} d={} N={} rep={}: {e}", cfg.model.label(), t.d, t.neurons, t.rep));
                output.records.extend(failed_rows(cfg, &t));
            }
        }
    }
    Ok(output)
}

fn failed_rows(cfg: &ExperimentConfig, t: &Task) -> Vec<RunRecord> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &lambda in &cfg.lambda {
            rows.push(RunRecord {
                model: cfg.model.label().into(),
                target: cfg.target.clone(),
                d: t.d,
                neurons: t.neurons,
                p: params(cfg.model, t.d, t.neurons, n),
                n,
                lambda,
                seed: repetition_seed(cfg.seed, t.rep),
                train_mse: f64::NAN,
                test_mse: f64::NAN,
                r0: f64::NAN,
                normalized_risk: f64::NAN,
                elapsed_s: f64::NAN,
            });
        }
    }
    rows
}

fn params(model: ModelChoice, d: usize, neurons: usize, n: usize) -> usize {
    match model {
        ModelChoice::Nt => neurons * d,
        ModelChoice::Krr => n,
        _ => neurons,
    }
}

fn feature_task(cfg: &ExperimentConfig, t: &Task) -> Result<Vec<RunRecord>> {
    let rep_seed = repetition_seed(cfg.seed, t.rep);
    let target = TargetFunction::by_name(&cfg.target, t.d)?;
    let act = Activation::shifted_relu(cfg.u0);
    let mut wrng = weight_stream(rep_seed, t.d, t.neurons);
    let model = match cfg.model {
        ModelChoice::NnSparse => FeatureModel::free_rf(sparse_nn_weights_with(t.neurons, t.d, &mut wrng), act),
        ModelChoice::Nt => FeatureModel::new(ModelKind::Nt, sample_weights_with(t.neurons, t.d, &mut wrng), act)?,
        _ => FeatureModel::new(ModelKind::Rf, sample_weights_with(t.neurons, t.d, &mut wrng), act)?,
    };
    let n_max = *cfg.n.iter().max().expect("validated nonempty");
    let x = training_inputs(rep_seed, t.d, n_max);
    let y = labels(&target, &x, cfg.tau, rep_seed);
    let x_test = test_inputs(rep_seed, t.d, cfg.n_test);
    let z = model.design(&x, cfg.max_entries)?;
    let z_test = model.design(&x_test, cfg.max_entries)?;
    let p = model.num_params();
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let zn = z.subrows(0, n);
        for &lambda in &cfg.lambda {
            let start = Instant::now();
            let coef = match cfg.solver {
                Solver::MinNorm => fit_minnorm(zn, &y[..n])?.coef,
                Solver::Ridge => {
                    let scaling = match cfg.scaling {
                        ScalingChoice::SampleWidth => RidgeScaling::SampleWidth { neurons: t.neurons, dim: t.d },
                        ScalingChoice::Plain => RidgeScaling::Plain,
                    };
                    fit_ridge(zn, &y[..n], lambda, scaling)?
                }
            };
            let train_mse = mse(&linalg::matvec(zn, &coef), &y[..n]);
            let risk = risk_on(&linalg::matvec(z_test.as_ref(), &coef), &target, &x_test);
            rows.push(RunRecord {
                model: cfg.model.label().into(),
                target: cfg.target.clone(),
                d: t.d,
                neurons: t.neurons,
                p,
                n,
                lambda,
                seed: rep_seed,
                train_mse,
                test_mse: risk.test_mse,
                r0: risk.r0,
                normalized_risk: risk.normalized_risk,
                elapsed_s: if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 },
            });
        }
    }
    Ok(rows)
}

/// The kernel selected by `kernel = rf|nt` and its spectrum.
pub fn build_kernel(choice: KernelChoice, u0: f64, d: usize, max_degree: usize) -> Result<(Arc<dyn DotKernel>, KernelSpectrum)> {
    let act = Activation::shifted_relu(u0);
    Ok(match choice {
        KernelChoice::Rf => {
            let k = RfKernel::new(&act, d, max_degree)?;
            let s = k.spectrum();
            (Arc::new(k), s)
        }
        KernelChoice::Nt => {
            let k = NtKernel::new(&act, d, max_degree)?;
            let s = k.spectrum();
            (Arc::new(k), s)
        }
    })
}

fn leading_block(h: &KernelMatrix, n: usize) -> KernelMatrix {
    KernelMatrix { h: h.h.submatrix(0, 0, n, n).to_owned(), at_one: h.at_one }
}

fn krr_task(cfg: &ExperimentConfig, t: &Task) -> Result<Vec<RunRecord>> {
    let rep_seed = repetition_seed(cfg.seed, t.rep);
    let target = TargetFunction::by_name(&cfg.target, t.d)?;
    let (kernel, spec) = build_kernel(cfg.kernel, cfg.u0, t.d, cfg.max_degree)?;
    let unit = match cfg.lambda_units {
        LambdaUnits::Absolute => 1.0,
        LambdaUnits::LambdaStar => spec.lambda_star(cfg.ell)?,
    };
    if spec.zero_mean() && !cfg.center {
        log::warn!("kernel has (numerically) zero mean; consider center = true");
    }
    let n_max = *cfg.n.iter().max().expect("validated nonempty");
    let x = training_inputs(rep_seed, t.d, n_max);
    let y = labels(&target, &x, cfg.tau, rep_seed);
    let x_test = test_inputs(rep_seed, t.d, cfg.n_test);
    let h_full = assemble_kernel(kernel.as_ref(), &x, DEFAULT_MAX_KERNEL_ROWS)?;
    let k_test: Mat<f64> = cross_kernel(kernel.as_ref(), &x_test, &x);
    let opts = KrrOptions { center_labels: cfg.center };
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let h = leading_block(&h_full, n);
        for &lambda in &cfg.lambda {
            let start = Instant::now();
            let value = lambda * unit;
            let fit = krr_fit(&h, &y[..n], value, opts)?;
            let train: Vec<f64> = linalg::matvec(h.h.as_ref(), &fit.coef).into_iter().map(|v| v + fit.offset).collect();
            let pred: Vec<f64> = linalg::matvec(k_test.subcols(0, n), &fit.coef).into_iter().map(|v| v + fit.offset).collect();
            let risk = risk_on(&pred, &target, &x_test);
            rows.push(RunRecord {
                model: cfg.model.label().into(),
                target: cfg.target.clone(),
                d: t.d,
                neurons: 0,
                p: n,
                n,
                lambda: value,
                seed: rep_seed,
                train_mse: mse(&train, &y[..n]),
                test_mse: risk.test_mse,
                r0: risk.r0,
                normalized_risk: risk.normalized_risk,
                elapsed_s: if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 },
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::record::to_csv_string;

    fn small(model: &str, extra: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!("model = {model}\nd = 8\nN = 16\nn = 50, 200\nn_test = 200\nseed = 5\n{extra}")).unwrap()
    }

    #[test]
    fn one_row_per_grid_point() {
        let c = ExperimentConfig::parse("d = 6\nN = 12\nn = 40\nn_test = 50").unwrap();
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.errors.is_empty());
        let r = &out.records[0];
        assert!((r.normalized_risk - r.test_mse / r.r0).abs() <= 1e-12 * r.normalized_risk.abs());
    }

    #[test]
    fn deterministic_across_threads() {
        for m in ["rf", "nt", "nn_sparse", "krr"] {
            let mut c = small(m, "repetitions = 3");
            let a = to_csv_string(RUN_HEADER, &run_sweep(&c).unwrap().records).unwrap();
            c.threads = 3;
            let b = to_csv_string(RUN_HEADER, &run_sweep(&c).unwrap().records).unwrap();
            assert_eq!(a, b, "{m}");
            assert_eq!(a.lines().count(), 1 + 2 * 3);
        }
    }

    #[test]
    fn ridge_and_lambda_star_units() {
        let c = small("rf", "solver = ridge\nlambda = 0, 1e-3, 1e3");
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.records.len(), 6);
        // heavy ridge pushes the fit toward zero
        assert!(out.records[2].train_mse > out.records[1].train_mse);
        let k = small("krr", "lambda = 0.5\nlambda_units = lambda_star\ntau = 0.1");
        let out = run_sweep(&k).unwrap();
        assert!(out.records.iter().all(|r| r.lambda > 0.0 && r.p == r.n && r.neurons == 0));
    }

    #[test]
    fn failing_task_becomes_nan_rows() {
        let c = small("nt", "max_entries = 100");
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.errors.len(), 1);
        assert!(out.records.iter().all(|r| r.test_mse.is_nan()));
        assert!(run_sweep(&small("rf", "target = nope")).is_err());
    }
}
