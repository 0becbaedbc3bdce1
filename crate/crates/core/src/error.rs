use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum ZrError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("wavenumber {0} is not a grid wavenumber")]
    NotOnGrid(f64),

    #[error("numerical health check failed: {0}")]
    NumericalHealth(String),

    #[error("non-finite field values at t = {time}")]
    BlowUp { time: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ZrError>;

impl ZrError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ZrError::Io {
            path: path.into(),
            source,
        }
    }
}
