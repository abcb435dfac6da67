use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("argument {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("non-finite integrand value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("matrix of {entries} entries exceeds the cap of {cap}")]
    MemoryCap { entries: u128, cap: u128 },

    #[error("singular system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("matrix not positive semidefinite: eigenvalue {eigenvalue:e} below jitter {jitter:e}")]
    Indefinite { eigenvalue: f64, jitter: f64 },

    #[error("power iteration did not converge after {iterations} steps (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("empirical risk mismatch: closed form {closed_form} vs direct residual {direct}")]
    RiskMismatch { closed_form: f64, direct: f64 },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
