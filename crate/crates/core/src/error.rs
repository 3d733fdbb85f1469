//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

/// Convenience alias used by every fallible routine in this crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Why an operation could not produce a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration or parameter value is outside its documented range.
    InvalidParameter(String),
    /// Two arguments have incompatible shapes.
    ShapeMismatch(String),
    /// Input data contains a NaN or infinity at the given (row, column).
    NonFinite { row: usize, col: usize },
    /// The given data column has zero norm and cannot be normalized.
    ZeroColumn(usize),
    /// Input is structurally valid but numerically degenerate.
    Degenerate(String),
    /// An iterative routine exhausted its iteration budget.
    NoConvergence(String),
    /// A sampling specification cannot be satisfied.
    Infeasible(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            Error::ZeroColumn(col) => write!(f, "column {col} has zero norm"),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::NoConvergence(msg) => write!(f, "no convergence: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible specification: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
