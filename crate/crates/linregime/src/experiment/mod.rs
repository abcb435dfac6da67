//! Experiment configuration, sweeps, staircase curves and checks.

pub mod checks;
pub mod config;
pub mod record;
pub mod staircase;
pub mod sweep;

pub use checks::{theorem_check, CheckLine, CheckName, CheckReport};
pub use config::{ExperimentConfig, KernelChoice, LambdaUnits, ModelChoice, RawConfig, ScalingChoice, Solver};
pub use record::{
    read_run_records, write_csv, write_csv_file, RunRecord, SpectrumRow, StaircaseRecord, GRAM_HEADER, RUN_HEADER,
    SPECTRUM_HEADER, STAIRCASE_HEADER,
};
pub use staircase::{gram_rows, run_staircase, spectrum_rows, staircase_medians, StaircasePoint};
pub use sweep::{run_sweep, run_tasks, SweepOutput};
