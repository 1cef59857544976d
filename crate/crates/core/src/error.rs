use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid fan: {0}")]
    InvalidFan(String),

    #[error("inconsistent weight sequence: {0}")]
    InconsistentWeights(String),

    #[error("invalid bundle data: {0}")]
    InvalidBundle(String),

    #[error("bundle validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("η restriction not in scope at wall {wall}: {reason}")]
    EtaNotInScope { wall: usize, reason: String },

    #[error("singular pasting matrix: {0}")]
    SingularPasting(String),

    #[error("degree window exceeded: {0}")]
    WindowExceeded(String),

    #[error("kernel of Q is larger than the principal lattice: {0}")]
    KernelTooLarge(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
