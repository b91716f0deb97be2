use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected a field with {expected} component(s), got {got}")]
    ComponentMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model parameter: {0}")]
    InvalidParams(String),

    #[error("unknown generator '{0}' (expected taylor-green, random-band or single-mode)")]
    UnknownGenerator(String),

    #[error("records are not time-ordered at index {index} ({prev} > {next})")]
    UnorderedRecords { index: usize, prev: f64, next: f64 },

    #[error("inadmissible inequality case {case}: {reason}")]
    InvalidCase { case: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
