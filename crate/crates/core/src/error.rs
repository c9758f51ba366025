use alloc::string::String;
use core::fmt;

/// Errors raised by the state primitives and the strategy evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed argument: bad qubit index set, dimension mismatch,
    /// non-unitary operator, incomplete projector set, unknown label.
    Input(String),
    /// Parameter outside the range the operation accepts.
    Domain { value: f64, min: f64, max: f64 },
    /// Requested state space exceeds the dense-matrix budget.
    Resource { requested: usize, limit: usize },
    /// Root bracketing found more than one sign change.
    Ambiguous { sign_changes: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Input(msg) => write!(f, "invalid input: {msg}"),
            Error::Domain { value, min, max } => {
                write!(f, "value {value} outside the admissible range [{min}, {max}]")
            }
            Error::Resource { requested, limit } => {
                write!(f, "dimension {requested} exceeds the limit of {limit}")
            }
            Error::Ambiguous { sign_changes } => {
                write!(f, "{sign_changes} sign changes found where exactly one was expected")
            }
        }
    }
}

impl core::error::Error for Error {}
