use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model input was negative or non-finite.
    #[error("invalid input {name} = {value}: must be finite and >= 0")]
    NegativeInput { name: &'static str, value: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParam { name: String, value: f64, reason: String },

    /// Parameters violate a condition the simulation depends on.
    #[error("infeasible parameters: {condition} does not hold")]
    Infeasible { condition: String },

    /// A division guard tripped (zero completion probability, zero decay rate).
    #[error("division guard: {0}")]
    DivisionGuard(String),

    /// NaN or infinity escaped an update. Always a bug or a pathological input.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("degenerate degree composition: no graduate degrees in series")]
    DegenerateComposition,

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("parameter `{0}` is not sweep-eligible")]
    NotSweepEligible(String),

    #[error("invalid range for {name}: [{low}, {high}]")]
    InvalidRange { name: String, low: f64, high: f64 },

    #[error("prcc degeneracy: {0}")]
    Degenerate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Checks that `value` is finite and nonnegative.
pub(crate) fn nonneg(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::NegativeInput { name, value })
    }
}
