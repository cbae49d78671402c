use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller supplied an out-of-range or malformed value.
    #[error("invalid input: {0}")]
    Input(String),

    /// The signal vector has zero norm and cannot be renormalized.
    #[error("degenerate state: all amplitudes are zero")]
    DegenerateState,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The stage network is not a well-formed feedforward graph.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
}
