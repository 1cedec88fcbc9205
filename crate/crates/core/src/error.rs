use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed algorithm: {0}")]
    Malformed(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown catalog entry `{0}`")]
    UnknownAlgorithm(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("algorithm has lambda-dependent coefficients but no lambda value was supplied")]
    MissingLambda,

    #[error("lambda = 0 cannot be substituted into a coefficient with negative degree")]
    LambdaZero,

    #[error("algorithm does not compute matrix multiplication, even up to O(lambda): {0}")]
    NotLambdaExact(String),

    #[error("graph too large for exact expansion ({vertices} vertices, s = {s}); use the spectral bound instead")]
    Capacity { vertices: usize, s: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
