//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, filtering, estimation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter value: {0}")]
    InvalidParameter(String),

    #[error("universe of {n} items is too large for enumeration (limit {limit})")]
    EnumerationTooLarge { n: usize, limit: usize },

    #[error("filter diverged at period {period} (|worth| exceeded {bound:e})")]
    Diverged { period: usize, bound: f64 },

    #[error("unconditional worth undefined: 1 - sum(phi) = {denom:e} is numerically zero")]
    UnitRoot { denom: f64 },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("data error at line {line}: {message}")]
    Data { line: usize, message: String },

    #[error("data error: {0}")]
    DataGeneral(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 usage/config, 2 data validation, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Io(_) => 1,
            Error::Data { .. }
            | Error::DataGeneral(_)
            | Error::InvalidRanking(_)
            | Error::InvalidSpec(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::NonFinite(_) => 2,
            Error::Diverged { .. }
            | Error::UnitRoot { .. }
            | Error::Optimization(_)
            | Error::EnumerationTooLarge { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
