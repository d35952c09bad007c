use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the tensor containers, kernels and approximation drivers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Container shape is inconsistent (zero order, zero dimension, wrong entry count).
    InvalidShape(String),
    /// An index or monomial falls outside the tensor.
    IndexOutOfRange(String),
    /// Operand shapes do not agree.
    DimensionMismatch(String),
    /// A caller-supplied argument violates a precondition.
    InvalidArgument(String),
    /// The requested rank is too large for the least-squares systems.
    RankTooLarge(String),
    /// A closed-form formula divides by a vanishing quantity.
    DegenerateSlice(String),
    /// An iterative factorization failed to converge.
    NonConvergence(&'static str),
    /// A computation produced NaN or infinity.
    NonFinite(&'static str),
}

impl Error {
    /// True for errors caused by invalid input rather than numerical trouble.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidShape(_)
                | Error::IndexOutOfRange(_)
                | Error::DimensionMismatch(_)
                | Error::InvalidArgument(_)
                | Error::RankTooLarge(_)
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidShape(msg) => write!(f, "invalid shape: {msg}"),
            Error::IndexOutOfRange(msg) => write!(f, "index out of range: {msg}"),
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::RankTooLarge(msg) => write!(f, "rank too large: {msg}"),
            Error::DegenerateSlice(msg) => write!(f, "degenerate slice: {msg}"),
            Error::NonConvergence(what) => write!(f, "{what} did not converge"),
            Error::NonFinite(what) => write!(f, "non-finite values in {what}"),
        }
    }
}

impl core::error::Error for Error {}
