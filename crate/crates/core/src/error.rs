use std::path::PathBuf;

/// Errors raised by construction, conversion, and file handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid label map: {0}")]
    InvalidLabelMap(String),

    #[error("invalid boundary grid: {0}")]
    InvalidGrid(String),

    #[error("inconsistent sparse boundaries: {0}")]
    Inconsistent(String),

    #[error("unknown region pair ({0}, {1})")]
    UnknownPair(u32, u32),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
