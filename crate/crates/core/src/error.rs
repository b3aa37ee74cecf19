use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("not enough nodes in class {class}: need {needed}, have {available}")]
    Size {
        class: String,
        needed: usize,
        available: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("numeric failure at {phase} iteration {iteration}: {msg}")]
    NonFinite {
        phase: &'static str,
        iteration: usize,
        msg: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing file {path}: {source}")]
    Missing {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("pickle decode error: {0}")]
    Pickle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Process exit code: 2 for config/input problems, 3 for IO, 4 for numeric aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            Error::NonFinite { .. } => 4,
            _ => 2,
        }
    }
}
