use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite numeric input: {0}")]
    NonFinite(&'static str),

    #[error("parameters violate GARCH(1,1) constraints: {0}")]
    InvalidParameter(String),

    #[error("numeric overflow while evaluating {0}")]
    NumericOverflow(&'static str),

    #[error("data validation failed: {0}")]
    DataValidation(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("Metropolis tuning did not reach the acceptance band after {blocks} blocks (last acceptance {last_acceptance:.3})")]
    TuningFailure { blocks: usize, last_acceptance: f64 },

    #[error("series has zero variance")]
    DegenerateSeries,

    #[error("no plateau in tau_int(T) up to T = {max_lag}; tau_int >= {lower_bound:.3}")]
    NoPlateau { max_lag: usize, lower_bound: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
