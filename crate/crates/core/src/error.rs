use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad caller-supplied data (out-of-range index, duplicate gold span, ...).
    #[error("invalid input: {0}")]
    Input(String),
    /// Bad configuration value (alpha out of range, empty task list, ...).
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Tensor dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A FOFE code that no sequence could have produced.
    #[error("malformed FOFE code: {0}")]
    MalformedCode(String),
    /// An operation that requires exact-rational arithmetic got float mode.
    #[error("arithmetic mode error: {0}")]
    Mode(String),
    /// Non-finite value encountered during training or inference.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// API contract violation (stale trace, foreign label, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Malformed input file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Checkpoint incompatible with the provided data or tool version.
    #[error("incompatible checkpoint: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
