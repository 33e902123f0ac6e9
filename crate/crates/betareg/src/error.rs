use std::path::PathBuf;

use thiserror::Error;

use crate::model::ChainState;

/// Crate-wide error type. `exit_code` maps variants onto the CLI contract:
/// 2 = validation, 3 = numerical failure, 4 = I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("factorization failed after {attempts} attempts (max jitter {max_jitter:.3e})")]
    Factorization { attempts: usize, max_jitter: f64 },

    #[error("chain failed at iteration {iteration}: {source}")]
    ChainFailure {
        iteration: usize,
        snapshot: Box<ChainState>,
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Domain(_) | Error::State(_) | Error::Validation(_) => 2,
            Error::Factorization { .. } | Error::ChainFailure { .. } => 3,
            Error::Io { .. } | Error::Parse { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
