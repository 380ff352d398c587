use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported size: {qubits} qubits (limit {limit})")]
    UnsupportedSize { qubits: usize, limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular detuning for qubit {0}")]
    SingularDetuning(usize),

    #[error("Fock cutoff too small: population {leakage:e} reached the top level")]
    CutoffTooSmall { leakage: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
