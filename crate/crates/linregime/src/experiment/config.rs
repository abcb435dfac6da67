//! Flat `key = value` configuration files.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored; list values are comma-separated. Keys are
//! case-sensitive (`N` is the neuron count, `n` the training-set size).
//! Each consumer takes the keys it understands and rejects the rest.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

fn config_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Config { line, msg: msg.into() })
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return config_err(line, format!("expected `key = value`, found `{body}`"));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return config_err(line, "empty key or value");
            }
            if entries.insert(k.to_string(), (line, v.to_string())).is_some() {
                return config_err(line, format!("duplicate key `{k}`"));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Overrides (or adds) a key, as done for command-line flags.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (0, value.into()));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Removes and parses a scalar value.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .or_else(|e| config_err(line, format!("bad value `{v}` for `{key}`: {e}"))),
        }
    }

    pub fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    /// Removes and parses a comma-separated list.
    pub fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim())
                .map(|s| s.parse::<T>().or_else(|e| config_err(line, format!("bad list item `{s}` for `{key}`: {e}"))))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn take_list_or<T: FromStr>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.take_list(key)?.unwrap_or(default))
    }

    /// Errors on any key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => config_err(line, format!("unknown key `{k}`")),
        }
    }
}

/// Parses the number formats used in configs, including `2e4`, as an integer.
fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 1e18 => Ok(f as usize),
        _ => Err(format!("`{s}` is not a nonnegative integer")),
    }
}

/// Wrapper so counts like `1.6e4` parse through `FromStr`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Count(pub usize);

impl FromStr for Count {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        parse_count(s).map(Count)
    }
}

pub(crate) fn counts(v: Vec<Count>) -> Vec<usize> {
    v.into_iter().map(|c| c.0).collect()
}

macro_rules! choice {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn label(&self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($text),+].join(", "))),
                }
            }
        }
    };
}

choice!(ModelChoice { Rf => "rf", Nt => "nt", Krr => "krr", NnSparse => "nn_sparse" });
choice!(Solver { MinNorm => "minnorm", Ridge => "ridge" });
choice!(ScalingChoice { SampleWidth => "sample_width", Plain => "plain" });
choice!(KernelChoice { Rf => "rf", Nt => "nt" });
choice!(LambdaUnits { Absolute => "absolute", LambdaStar => "lambda_star" });

/// A sweep over `(d, N, n, lambda, repetition)`.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelChoice,
    pub target: String,
    pub d: Vec<usize>,
    pub neurons: Vec<usize>,
    pub n: Vec<usize>,
    pub lambda: Vec<f64>,
    pub lambda_units: LambdaUnits,
    /// Degree used for `lambda_star` units.
    pub ell: usize,
    pub solver: Solver,
    pub scaling: ScalingChoice,
    pub u0: f64,
    /// Label noise standard deviation.
    pub tau: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub n_test: usize,
    pub kernel: KernelChoice,
    pub max_degree: usize,
    pub center: bool,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub output: Option<PathBuf>,
    /// Record wall-clock seconds; off by default so output is reproducible.
    pub timing: bool,
    pub max_entries: u128,
    /// Gegenbauer degrees for Gram diagnostics.
    pub degree: Vec<usize>,
    /// Staircase NT fits use `n = n_factor * p` samples.
    pub n_factor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Rf,
            target: "quad_split".into(),
            d: vec![30],
            neurons: vec![240],
            n: vec![1000],
            lambda: vec![0.0],
            lambda_units: LambdaUnits::Absolute,
            ell: 1,
            solver: Solver::MinNorm,
            scaling: ScalingChoice::SampleWidth,
            u0: 0.5,
            tau: 0.0,
            repetitions: 1,
            seed: 0,
            n_test: 1500,
            kernel: KernelChoice::Rf,
            max_degree: crate::spectrum::DEFAULT_DEGREE,
            center: false,
            threads: 0,
            output: None,
            timing: false,
            max_entries: crate::linmodels::DEFAULT_MAX_ENTRIES,
            degree: vec![2],
            n_factor: 4.0,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(RawConfig::parse(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_raw(RawConfig::from_file(path)?)
    }

    pub fn from_raw(mut raw: RawConfig) -> Result<Self> {
        let def = Self::default();
        let cfg = Self {
            model: raw.take_or("model", def.model)?,
            target: raw.take_or("target", def.target)?,
            d: counts(raw.take_list_or("d", vec![Count(def.d[0])])?),
            neurons: counts(raw.take_list_or("N", vec![Count(def.neurons[0])])?),
            n: counts(raw.take_list_or("n", vec![Count(def.n[0])])?),
            lambda: raw.take_list_or("lambda", def.lambda)?,
            lambda_units: raw.take_or("lambda_units", def.lambda_units)?,
            ell: raw.take_or::<Count>("ell", Count(def.ell))?.0,
            solver: raw.take_or("solver", def.solver)?,
            scaling: raw.take_or("scaling", def.scaling)?,
            u0: raw.take_or("u0", def.u0)?,
            tau: raw.take_or("tau", def.tau)?,
            repetitions: raw.take_or::<Count>("repetitions", Count(def.repetitions))?.0,
            seed: raw.take_or("seed", def.seed)?,
            n_test: raw.take_or::<Count>("n_test", Count(def.n_test))?.0,
            kernel: raw.take_or("kernel", def.kernel)?,
            max_degree: raw.take_or::<Count>("max_degree", Count(def.max_degree))?.0,
            center: raw.take_or("center", def.center)?,
            threads: raw.take_or::<Count>("threads", Count(def.threads))?.0,
            output: raw.take::<PathBuf>("output")?,
            timing: raw.take_or("timing", def.timing)?,
            max_entries: raw.take_or::<Count>("max_entries", Count(def.max_entries as usize))?.0 as u128,
            degree: counts(raw.take_list_or("degree", vec![Count(def.degree[0])])?),
            n_factor: raw.take_or("n_factor", def.n_factor)?,
        };
        raw.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config { line: 0, msg });
        if self.d.is_empty() || self.neurons.is_empty() || self.n.is_empty() || self.lambda.is_empty() || self.degree.is_empty() {
            return fail("all grids must be nonempty".into());
        }
        if self.d.iter().any(|&d| d < 2) {
            return fail("d must be at least 2".into());
        }
        if self.repetitions < 1 {
            return fail("repetitions must be at least 1".into());
        }
        if self.n.iter().any(|&n| n == 0) || self.n_test < 2 {
            return fail("training and test sizes must be positive (n_test >= 2)".into());
        }
        if self.model != ModelChoice::Krr && self.neurons.iter().any(|&n| n == 0) {
            return fail("N must be positive".into());
        }
        if self.lambda.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return fail("lambda values must be finite and nonnegative".into());
        }
        if self.solver == Solver::MinNorm && self.model != ModelChoice::Krr && self.lambda.iter().any(|&l| l != 0.0) {
            return fail("solver = minnorm takes lambda = 0 only; use solver = ridge".into());
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) || !self.u0.is_finite() {
            return fail("tau must be finite and nonnegative, u0 finite".into());
        }
        if !(self.n_factor > 0.0) {
            return fail("n_factor must be positive".into());
        }
        Ok(())
    }
}
