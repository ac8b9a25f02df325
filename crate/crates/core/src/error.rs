use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("time ranges do not overlap")]
    EmptyOverlap,

    #[error("insufficient frames: need {needed}, have {have}")]
    InsufficientFrames { needed: usize, have: usize },

    #[error("normalization stats mismatch: {0}")]
    StatsMismatch(String),

    #[error("model config mismatch: {0}")]
    ConfigMismatch(String),

    #[error("unsupported model file version {found} (supported: {supported})")]
    FormatVersion { found: u32, supported: u32 },

    #[error("model file corrupt: {0}")]
    Corrupt(String),

    #[error("numeric failure: {msg}")]
    Numeric { msg: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric { msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
