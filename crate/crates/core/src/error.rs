use std::io;

use thiserror::Error;

/// Errors raised by index construction, querying, and persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("index {index} out of bounds (len {len})")]
    OutOfBounds { index: usize, len: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for failures caused by the filesystem or a truncated stream
    /// rather than by bad parameters or malformed content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
