use core::fmt;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands have incompatible shapes for the named operation.
    DimMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    /// A matrix was constructed from data that violates its invariants.
    InvalidMatrix(&'static str),
    /// An initialization that must be strictly positive contained a
    /// non-positive entry.
    NonPositiveInit,
    /// The loss became non-finite at the given iteration.
    NumericalFailure { iteration: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimMismatch { op, lhs, rhs } => write!(
                f,
                "{op}: dimension mismatch {}x{} vs {}x{}",
                lhs.0, lhs.1, rhs.0, rhs.1
            ),
            Error::InvalidMatrix(msg) => write!(f, "invalid matrix: {msg}"),
            Error::NonPositiveInit => write!(f, "initialization must be strictly positive"),
            Error::NumericalFailure { iteration } => {
                write!(f, "loss became non-finite at iteration {iteration}")
            }
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
