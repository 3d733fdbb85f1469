//! CLI error taxonomy and the exit-code mapping.
//!
//! Exit codes: 0 success, 1 usage/parameter error, 2 malformed or unreadable
//! input data, 3 algorithmic degeneracy (the input is readable but the
//! method cannot proceed on it).

use std::fmt;

use nls_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameter combinations: exit 1.
    Usage(String),
    /// Unreadable or malformed input files: exit 2.
    Data(String),
    /// The algorithm cannot proceed on this input: exit 3.
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match &err {
            CoreError::InvalidParameter(_) | CoreError::Infeasible(_) => {
                CliError::Usage(err.to_string())
            }
            CoreError::NonFinite { .. }
            | CoreError::ZeroColumn(_)
            | CoreError::ShapeMismatch(_) => CliError::Data(err.to_string()),
            // The Display prefix already says "degenerate input", so carry
            // only the explanation.
            CoreError::Degenerate(msg) => CliError::Degenerate(msg.clone()),
            CoreError::NoConvergence(_) => CliError::Degenerate(err.to_string()),
        }
    }
}
