use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no samples")]
    NoSamples,

    #[error("invalid loss: {0}")]
    InvalidLoss(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data for splitting: {n_data} points for {n_classifiers} classifiers")]
    InsufficientData { n_data: usize, n_classifiers: usize },

    #[error("degenerate direction: projection vector is zero")]
    DegenerateDirection,

    #[error("sign classifier constant: theta must lie strictly inside (0, pi)")]
    ConstantClassifier,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("H not positive-definite")]
    NotPositiveDefinite,

    #[error("divergent: theta3 series requires 0 <= q < 1")]
    Divergent,

    #[error("zero-norm row: input row {row} cannot be normalized")]
    ZeroNormRow { row: usize },

    #[error("missing class: no rows labeled {0:?}")]
    MissingClass(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("lower-bound precondition violated: {0}")]
    PreconditionViolated(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
