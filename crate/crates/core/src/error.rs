//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix dimension does not match what the operation expects.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// Symbol-set parameters are mutually inconsistent (e.g. the last pulse
    /// would run past the end of the symbol period).
    #[error("inconsistent parameters: {0}")]
    ParameterInconsistency(String),

    /// Training produced non-finite matrix entries; the step size is too
    /// large for the training set.
    #[error("training diverged at epoch {epoch}: non-finite entries in the weight matrix")]
    Diverged { epoch: usize },

    /// A classifier was given an alphabet with no prototypes.
    #[error("empty alphabet")]
    EmptyAlphabet,

    /// An empty impulse response was supplied for the multipath channel.
    #[error("empty impulse response")]
    EmptyImpulseResponse,

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
