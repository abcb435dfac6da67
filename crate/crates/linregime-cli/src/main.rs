//! Command-line front end for sweeps, staircase curves, spectra and checks.

use clap::{Args, Parser, Subcommand};
use linregime::experiment::{
    gram_rows, run_staircase, run_sweep, spectrum_rows, theorem_check, write_csv, CheckName, ExperimentConfig,
    RawConfig, GRAM_HEADER, SPECTRUM_HEADER, STAIRCASE_HEADER,
};
use linregime::Error;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "linregime", version, about = "Random-features, neural-tangent and kernel ridge regression experiments on the sphere")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines, `#` comments)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when absent and the config sets no `output`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, overriding the config (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log progress and warnings to stderr
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write one record per grid point and repetition
    Simulate,
    /// Approximation risk against log(params)/log(d)
    Staircase,
    /// Kernel eigenvalues and harmonic-space dimensions
    Spectrum,
    /// Run a named check and report measured values against thresholds
    TheoremCheck {
        /// rf_decomposition, krr_plateau, interpolator_bound or gram_concentration
        name: CheckName,
    },
    /// Operator-norm deviation of Gegenbauer Gram matrices
    Gram,
}

const EXIT_THRESHOLD: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn raw_config(common: &Common) -> Result<RawConfig, Error> {
    let mut raw = match &common.config {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::default(),
    };
    if let Some(s) = common.seed {
        raw.set("seed", s.to_string());
    }
    if let Some(t) = common.threads {
        raw.set("threads", t.to_string());
    }
    Ok(raw)
}

fn experiment_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::from_raw(raw_config(common)?)?;
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn emit<R: linregime::experiment::record::CsvRow>(out: Option<&Path>, header: &str, rows: &[R]) -> Result<(), Error> {
    match out {
        Some(p) => linregime::experiment::write_csv_file(p, header, rows),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&mut lock, header, rows)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Simulate => {
            let cfg = experiment_config(&cli.common)?;
            let out = run_sweep(&cfg)?;
            match &cfg.output {
                Some(p) => out.write(p)?,
                None => emit(None, linregime::experiment::RUN_HEADER, &out.records)?,
            }
            for e in &out.errors {
                eprintln!("task failed: {e}");
            }
            log::info!("{} records, {} failed tasks", out.records.len(), out.errors.len());
        }
        Command::Staircase => {
            let cfg = experiment_config(&cli.common)?;
            emit(cfg.output.as_deref(), STAIRCASE_HEADER, &run_staircase(&cfg)?)?;
        }
        Command::Spectrum => {
            let cfg = experiment_config(&cli.common)?;
            emit(cfg.output.as_deref(), SPECTRUM_HEADER, &spectrum_rows(&cfg)?)?;
        }
        Command::Gram => {
            let cfg = experiment_config(&cli.common)?;
            emit(cfg.output.as_deref(), GRAM_HEADER, &gram_rows(&cfg)?)?;
        }
        Command::TheoremCheck { name } => {
            let report = theorem_check(*name, raw_config(&cli.common)?)?;
            print!("{report}");
            if let Some(p) = &cli.common.out {
                std::fs::write(p, report.to_string())?;
            }
            if !report.passed() {
                return Ok(EXIT_THRESHOLD);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.common.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } | Error::InvalidArgument(_) | Error::Io(_) => EXIT_CONFIG,
                _ => EXIT_THRESHOLD,
            })
        }
    }
}
