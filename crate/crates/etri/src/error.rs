use std::fmt;

use etri_core::surface::SurfaceError;
use thiserror::Error;

/// A syntax error with a 1-based position.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        ParseError::new(e.line().max(1), e.column().max(1), e.to_string())
    }
}

/// Errors from reading a file that parsed but describes an invalid object.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invariant violation: {0}")]
    InvariantViolation(#[from] SurfaceError),
    #[error("invalid colouring: {0}")]
    InvalidColouring(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
}
