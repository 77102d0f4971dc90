//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the vital pipeline.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Dimension or length mismatch between numeric values.
    #[error("shape error: {0}")]
    Shape(String),

    /// Invalid configuration (bad parameter, bad layout, bad spec).
    #[error("config error: {0}")]
    Config(String),

    /// Invalid input data (empty clip, NaN value, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A value fell outside its documented range.
    #[error("range error: {0}")]
    Range(String),

    /// A model response did not match the expected grammar.
    #[error("parse error: {0}")]
    Parse(String),

    /// A scripted fixture was missing a requested entry.
    #[error("fixture error: {0}")]
    Fixture(String),

    /// Manifest validation failure, addressed by line number.
    #[error("manifest error (line {line}): {message}")]
    Manifest { line: usize, message: String },

    /// General validation failure without a line number.
    #[error("validation error: {0}")]
    Validation(String),

    /// Numeric blow-up: a public operation produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Remote service answered with a non-retryable status.
    #[error("protocol error (status {status}): {message}")]
    Protocol { status: u16, message: String },

    /// Retry budget exhausted against a remote service.
    #[error("retry attempts exhausted after {attempts} requests: {message}")]
    Exhausted { attempts: u32, message: String },

    /// Remote response body did not decode into the expected shape.
    #[error("decode error: {0}")]
    Decode(String),

    /// Connection-level failure talking to a remote service.
    #[error("transport error: {0}")]
    Transport(String),

    /// Fewer joined objects than the evaluation minimum.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Ground-truth data missing or unusable for a property.
    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
