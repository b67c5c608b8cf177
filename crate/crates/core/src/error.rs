use thiserror::Error;

/// Errors produced by graph construction, reduction, and propagation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested object exceeds the supported index or memory range.
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    /// A closed-form formula is singular at the requested parameters.
    #[error("singular formula: {0}")]
    SingularFormula(String),

    /// The supplied partition is not equitable for the graph.
    #[error("partition is not equitable: {0}")]
    NotEquitable(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::CapacityExceeded(msg.into())
    }
}
