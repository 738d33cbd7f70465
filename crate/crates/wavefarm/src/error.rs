use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the power model, the optimizers or the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency {omega} rad/s is outside the coefficient table range [{min}, {max}]")]
    ExtrapolationRefused { omega: f64, min: f64, max: f64 },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid hydrodynamic table: {0}")]
    InvalidTable(String),

    #[error("invalid buoy specification: {0}")]
    InvalidBuoy(String),

    #[error("impedance matrix is singular or ill-conditioned at omega = {omega} rad/s (condition estimate {condition:e})")]
    Solver { omega: f64, condition: f64 },

    #[error("invalid wave climate: {0}")]
    InvalidClimate(String),

    #[error("q-factor undefined: isolated buoy power is zero")]
    UndefinedQFactor,

    #[error("invalid start point: objective is not finite at x0")]
    InvalidStart,

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("invalid optimizer parameters: {0}")]
    InvalidParams(String),

    #[error("unknown algorithm id {0}")]
    UnknownAlgorithm(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
