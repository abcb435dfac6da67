//! Pass/fail checks of the risk decompositions and concentration bounds.

use super::config::{counts, Count, KernelChoice, RawConfig};
use super::sweep::{build_kernel, labels, repetition_seed, run_tasks, training_inputs, weight_stream};
use crate::error::{invalid, Result};
use crate::krr::{assemble_kernel, interpolator_bound, krr_empirical_risk, krr_fit, krr_test_risk, KrrOptions};
use crate::labkit::{gram_diagnostic, median};
use crate::linmodels::{rf_population_risks, sample_weights_with, PopulationMethod, TargetFunction};
use crate::seeding::{self, role};
use crate::spectrum::Activation;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckName {
    RfDecomposition,
    KrrPlateau,
    InterpolatorBound,
    GramConcentration,
}

impl CheckName {
    pub const ALL: [CheckName; 4] =
        [CheckName::RfDecomposition, CheckName::KrrPlateau, CheckName::InterpolatorBound, CheckName::GramConcentration];

    pub fn label(&self) -> &'static str {
        match self {
            CheckName::RfDecomposition => "rf_decomposition",
            CheckName::KrrPlateau => "krr_plateau",
            CheckName::InterpolatorBound => "interpolator_bound",
            CheckName::GramConcentration => "gram_concentration",
        }
    }
}

impl FromStr for CheckName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| format!("unknown check `{s}`; expected one of rf_decomposition, krr_plateau, interpolator_bound, gram_concentration"))
    }
}

/// One measured quantity; passes when `measured <= threshold` unless stated otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub quantity: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckLine {
    fn at_most(quantity: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { quantity: quantity.into(), measured, threshold, passed: measured <= threshold }
    }

    fn at_least(quantity: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { quantity: quantity.into(), measured, threshold, passed: measured >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: CheckName,
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.name.label(), if self.passed() { "PASS" } else { "FAIL" })?;
        for l in &self.lines {
            writeln!(
                f,
                "  [{}] {}: measured {:.6e}, threshold {:.6e}",
                if l.passed { "ok" } else { "fail" },
                l.quantity,
                l.measured,
                l.threshold
            )?;
        }
        Ok(())
    }
}

/// Runs a named check; keys in `raw` override its default configuration.
pub fn theorem_check(name: CheckName, mut raw: RawConfig) -> Result<CheckReport> {
    let report = match name {
        CheckName::RfDecomposition => {
            let p = DecompositionParams::from_raw(&mut raw)?;
            raw.finish()?;
            rf_decomposition(&p)?
        }
        CheckName::KrrPlateau | CheckName::InterpolatorBound => {
            let default_lambda = if name == CheckName::KrrPlateau { vec![0.5] } else { vec![0.1, 0.5, 0.9] };
            let p = KrrCheckParams::from_raw(&mut raw, default_lambda)?;
            raw.finish()?;
            if name == CheckName::KrrPlateau {
                krr_plateau(&p)?
            } else {
                interpolator_check(&p)?
            }
        }
        CheckName::GramConcentration => {
            let p = GramParams::from_raw(&mut raw)?;
            raw.finish()?;
            gram_concentration(&p)?
        }
    };
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct DecompositionParams {
    pub d: usize,
    pub neurons: usize,
    pub draws: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub u0: f64,
    pub target: String,
    pub threads: usize,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        Self { d: 30, neurons: 500, draws: 200_000, repetitions: 3, seed: 0, u0: 0.5, target: "quad_split_plus_sum".into(), threads: 0 }
    }
}

impl DecompositionParams {
    fn from_raw(raw: &mut RawConfig) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            d: raw.take_or::<Count>("d", Count(d.d))?.0,
            neurons: raw.take_or::<Count>("N", Count(d.neurons))?.0,
            draws: raw.take_or::<Count>("draws", Count(d.draws))?.0,
            repetitions: raw.take_or::<Count>("repetitions", Count(d.repetitions))?.0,
            seed: raw.take_or("seed", d.seed)?,
            u0: raw.take_or("u0", d.u0)?,
            target: raw.take_or("target", d.target)?,
            threads: raw.take_or::<Count>("threads", Count(d.threads))?.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionMeasurement {
    pub risk_full: f64,
    pub risk_low: f64,
    pub plateau: f64,
    pub deviation: f64,
    pub tolerance: f64,
}

/// `R(f) - R(P_{<=1} f) - |P_{>1} f|^2` from Monte Carlo population risks
/// sharing draws, per repetition.
pub fn decomposition_measurements(p: &DecompositionParams) -> Result<Vec<DecompositionMeasurement>> {
    let f = TargetFunction::by_name(&p.target, p.d)?;
    let Some(low) = f.low_degree(1) else {
        return invalid("rf_decomposition needs a polynomial target");
    };
    let plateau = f.plateau(1).expect("polynomial targets have closed-form norms");
    let norm = f.second_moment().expect("polynomial targets have closed-form norms");
    let act = Activation::shifted_relu(p.u0);
    let reps: Vec<usize> = (0..p.repetitions).collect();
    run_tasks(p.threads, &reps, |&rep| {
        let rep_seed = repetition_seed(p.seed, rep);
        let w = sample_weights_with(p.neurons, p.d, &mut weight_stream(rep_seed, p.d, p.neurons));
        let seed = seeding::derive_seed(rep_seed, &[role::MONTE_CARLO]);
        let r = rf_population_risks(&act, w.as_ref(), &[&f, &low], PopulationMethod::MonteCarlo { draws: p.draws, seed })?;
        let deviation = r[0].risk - r[1].risk - plateau;
        let mc = (r[0].std_error.powi(2) + r[1].std_error.powi(2)).sqrt();
        Ok(DecompositionMeasurement {
            risk_full: r[0].risk,
            risk_low: r[1].risk,
            plateau,
            deviation,
            tolerance: 0.1 * (norm * plateau).sqrt() + 3.0 * mc,
        })
    })
    .into_iter()
    .collect()
}

fn rf_decomposition(p: &DecompositionParams) -> Result<CheckReport> {
    let m = decomposition_measurements(p)?;
    let lines = m
        .iter()
        .enumerate()
        .map(|(rep, m)| CheckLine::at_most(format!("rep {rep}: |R(f) - R(P<=1 f) - |P>1 f|^2|"), m.deviation.abs(), m.tolerance))
        .collect();
    Ok(CheckReport { name: CheckName::RfDecomposition, lines })
}

#[derive(Debug, Clone)]
pub struct KrrCheckParams {
    pub d: usize,
    pub n: usize,
    pub ell: usize,
    pub tau: f64,
    /// Multiples of `lambda_*(d, ell)`.
    pub lambda: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
    pub n_test: usize,
    pub u0: f64,
    pub kernel: KernelChoice,
    pub max_degree: usize,
    pub target: String,
    pub center: bool,
    pub threads: usize,
}

impl Default for KrrCheckParams {
    fn default() -> Self {
        Self {
            d: 50,
            n: 800,
            ell: 1,
            tau: 0.1,
            lambda: vec![0.5],
            repetitions: 5,
            seed: 0,
            n_test: 1500,
            u0: 0.5,
            kernel: KernelChoice::Rf,
            max_degree: crate::spectrum::DEFAULT_DEGREE,
            target: "quad_split_plus_x1".into(),
            center: false,
            threads: 0,
        }
    }
}

impl KrrCheckParams {
    fn from_raw(raw: &mut RawConfig, default_lambda: Vec<f64>) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            d: raw.take_or::<Count>("d", Count(d.d))?.0,
            n: raw.take_or::<Count>("n", Count(d.n))?.0,
            ell: raw.take_or::<Count>("ell", Count(d.ell))?.0,
            tau: raw.take_or("tau", d.tau)?,
            lambda: raw.take_list_or("lambda", default_lambda)?,
            repetitions: raw.take_or::<Count>("repetitions", Count(d.repetitions))?.0,
            seed: raw.take_or("seed", d.seed)?,
            n_test: raw.take_or::<Count>("n_test", Count(d.n_test))?.0,
            u0: raw.take_or("u0", d.u0)?,
            kernel: raw.take_or("kernel", d.kernel)?,
            max_degree: raw.take_or::<Count>("max_degree", Count(d.max_degree))?.0,
            target: raw.take_or("target", d.target)?,
            center: raw.take_or("center", d.center)?,
            threads: raw.take_or::<Count>("threads", Count(d.threads))?.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrrMeasurement {
    pub lambda_multiple: f64,
    pub lambda: f64,
    pub test_risk: f64,
    pub empirical_risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrrScenario {
    pub norm_sq: f64,
    pub plateau: f64,
    pub kappa: f64,
    pub lambda_star: f64,
    /// Indexed by repetition, then by lambda.
    pub runs: Vec<Vec<KrrMeasurement>>,
}

/// Kernel ridge regression on noisy samples at each `lambda` multiple, per repetition.
pub fn krr_scenario(p: &KrrCheckParams) -> Result<KrrScenario> {
    let f = TargetFunction::by_name(&p.target, p.d)?;
    let (Some(norm_sq), Some(plateau)) = (f.second_moment(), f.plateau(p.ell)) else {
        return invalid("target needs closed-form degree norms");
    };
    let (kernel, spec) = build_kernel(p.kernel, p.u0, p.d, p.max_degree)?;
    let lambda_star = spec.lambda_star(p.ell)?;
    let kappa = spec.kappa(p.ell);
    let reps: Vec<usize> = (0..p.repetitions).collect();
    let runs: Result<Vec<Vec<KrrMeasurement>>> = run_tasks(p.threads, &reps, |&rep| {
        let rep_seed = repetition_seed(p.seed, rep);
        let x = training_inputs(rep_seed, p.d, p.n);
        let y = labels(&f, &x, p.tau, rep_seed);
        let h = assemble_kernel(kernel.as_ref(), &x, crate::krr::DEFAULT_MAX_KERNEL_ROWS)?;
        let test_seed = seeding::derive_seed(rep_seed, &[role::TEST, p.d as u64]);
        p.lambda
            .iter()
            .map(|&m| {
                let fit = krr_fit(&h, &y, m * lambda_star, KrrOptions { center_labels: p.center })?;
                let emp = krr_empirical_risk(&h, &y, &fit)?;
                let r = krr_test_risk(kernel.as_ref(), &x, &fit, &f, p.n_test, test_seed);
                Ok(KrrMeasurement { lambda_multiple: m, lambda: m * lambda_star, test_risk: r.test_mse, empirical_risk: emp.closed_form })
            })
            .collect()
    })
    .into_iter()
    .collect();
    Ok(KrrScenario { norm_sq, plateau, kappa, lambda_star, runs: runs? })
}

fn krr_plateau(p: &KrrCheckParams) -> Result<CheckReport> {
    let s = krr_scenario(p)?;
    let scale = s.norm_sq + p.tau * p.tau;
    let lines = p
        .lambda
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let dev: Vec<f64> = s.runs.iter().map(|r| (r[j].test_risk - s.plateau).abs()).collect();
            CheckLine::at_most(format!("median |R_KR - |P>{} f|^2| at lambda = {m} lambda_*", p.ell), median(&dev), 0.2 * scale)
        })
        .collect();
    Ok(CheckReport { name: CheckName::KrrPlateau, lines })
}

fn interpolator_check(p: &KrrCheckParams) -> Result<CheckReport> {
    let s = krr_scenario(p)?;
    let scale = s.norm_sq + p.tau * p.tau;
    let lines = p
        .lambda
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let worst = s.runs.iter().map(|r| r[j].empirical_risk).fold(0.0f64, f64::max);
            let bound = interpolator_bound(scale, m * s.lambda_star, s.kappa, 0.2);
            CheckLine::at_most(format!("max empirical risk at lambda = {m} lambda_*"), worst, bound)
        })
        .collect();
    Ok(CheckReport { name: CheckName::InterpolatorBound, lines })
}

#[derive(Debug, Clone)]
pub struct GramParams {
    pub d: usize,
    pub degree: usize,
    pub neurons: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Dimensions along which the median must decrease.
    pub d_grid: Vec<usize>,
    pub threads: usize,
}

impl Default for GramParams {
    fn default() -> Self {
        Self { d: 100, degree: 2, neurons: 100, repetitions: 5, seed: 0, d_grid: vec![50, 100, 200], threads: 0 }
    }
}

impl GramParams {
    fn from_raw(raw: &mut RawConfig) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            d: raw.take_or::<Count>("d", Count(d.d))?.0,
            degree: raw.take_or::<Count>("degree", Count(d.degree))?.0,
            neurons: raw.take_or::<Count>("N", Count(d.neurons))?.0,
            repetitions: raw.take_or::<Count>("repetitions", Count(d.repetitions))?.0,
            seed: raw.take_or("seed", d.seed)?,
            d_grid: counts(raw.take_list_or("d_grid", d.d_grid.iter().map(|&v| Count(v)).collect())?),
            threads: raw.take_or::<Count>("threads", Count(d.threads))?.0,
        })
    }
}

fn gram_concentration(p: &GramParams) -> Result<CheckReport> {
    let at = gram_diagnostic(p.d, p.degree, p.neurons, p.repetitions, p.seed)?;
    let within = at.iter().filter(|r| r.opnorm_deviation <= 0.5).count();
    let needed = (4 * p.repetitions).div_ceil(5);
    let mut lines = vec![CheckLine::at_least(
        format!("seeds with |W - I|_op <= 0.5 at d = {}, k = {}, N = {}", p.d, p.degree, p.neurons),
        within as f64,
        needed as f64,
    )];
    let medians: Result<Vec<f64>> = run_tasks(p.threads, &p.d_grid, |&d| {
        let v: Vec<f64> = gram_diagnostic(d, p.degree, p.neurons, p.repetitions, p.seed)?.iter().map(|r| r.opnorm_deviation).collect();
        Ok(median(&v))
    })
    .into_iter()
    .collect();
    let medians = medians?;
    for (w, ds) in medians.windows(2).zip(p.d_grid.windows(2)) {
        lines.push(CheckLine {
            quantity: format!("median at d = {} below median at d = {}", ds[1], ds[0]),
            measured: w[1],
            threshold: w[0],
            passed: w[1] < w[0],
        });
    }
    Ok(CheckReport { name: CheckName::GramConcentration, lines })
}
