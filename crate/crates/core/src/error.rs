use num_complex::Complex64;
use thiserror::Error;

use crate::parse::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar parameter is outside the domain an operation accepts.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input is a case the operation is not defined for, e.g. `g ≡ a`.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A parameter makes a recurrence singular (q-integer vanishing).
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("root solver did not converge after {iterations} iterations")]
    SolverFailure {
        iterations: usize,
        best: Vec<Complex64>,
    },

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    /// True for errors that come from numerics rather than from bad input.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure { .. } | Error::DegenerateParameter(_)
        )
    }
}
