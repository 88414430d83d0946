use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain on which a function is defined.
    #[error("{what}: argument {value} outside the valid domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid fiber specification: {0}")]
    InvalidFiber(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("series failed to converge: {0}")]
    Convergence(String),

    /// The field (or flux pair) is identically zero where a normalized quantity was requested.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("fit did not converge: {0}")]
    FitNonConvergence(String),

    #[error("missing column `{0}` in flux dataset header")]
    MissingColumn(String),

    #[error("malformed flux dataset at row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
