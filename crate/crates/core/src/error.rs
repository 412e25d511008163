use thiserror::Error;

/// Errors raised by the laboratory. Timeouts of hitting times are not errors;
/// see [`crate::dynamics::HitOutcome`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown configuration name `{0}`")]
    UnknownName(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("time {requested} exceeds environment horizon {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },

    #[error("bond range [{lo};{hi}] of the environment does not cover [{need_lo};{need_hi}]")]
    BondRange {
        lo: i64,
        hi: i64,
        need_lo: i64,
        need_hi: i64,
    },

    #[error("state space size {size} exceeds the configured cap {cap}")]
    CapExceeded { size: u64, cap: u64 },

    #[error("argument {value} outside the accuracy range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("quadrature produced a non-finite entry at node {0}")]
    Quadrature(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
