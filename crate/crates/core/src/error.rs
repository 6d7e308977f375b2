use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Requested rank is outside what the method supports for this tensor.
    #[error("rank {rank} is not supported: {reason}")]
    Rank { rank: usize, reason: String },

    /// A documented precondition on the inputs does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{routine} did not converge after {iterations} iterations")]
    NumericalFailure {
        routine: &'static str,
        iterations: usize,
    },

    /// Column `component` of factor `mode` is identically zero.
    #[error("degenerate component {component} in mode {mode}: factor column is zero")]
    DegenerateComponent { component: usize, mode: usize },

    #[error("malformed tensor file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn rank(rank: usize, reason: impl Into<String>) -> Self {
        Error::Rank {
            rank,
            reason: reason.into(),
        }
    }
}
