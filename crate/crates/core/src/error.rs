use thiserror::Error;

/// Errors raised by sequence construction, evaluation and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sequence must not be empty")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("invalid symbol {symbol:?} at position {position}")]
    InvalidSymbol { symbol: char, position: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length {length} exceeds the supported maximum of {max}")]
    Capacity { length: usize, max: usize },
    #[error("sequences are not a complementary pair")]
    NotComplementary,
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
