use thiserror::Error;

/// Errors produced by constructors and operations across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("zero measure: weights sum to {sum}")]
    ZeroMeasure { sum: f64 },
    #[error("negative weight {weight} at atom `{atom}`")]
    NegativeWeight { atom: String, weight: f64 },
    #[error("unknown atom `{atom}` in space {space}")]
    UnknownAtom { atom: String, space: String },
    #[error("space mismatch: expected {expected}, got {got}")]
    SpaceMismatch { expected: String, got: String },
    #[error("bad mixture coefficients: {0}")]
    BadCoefficients(String),
    #[error("dirac laws of an affine family must share one outcome space")]
    OutcomeSpaceMismatch,
    #[error("kernel outcome space is not a declared product")]
    NotProductSpace,
    #[error("event {{{event}}} has probability {prob:e}, below tolerance")]
    ZeroProbabilityEvent { event: String, prob: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("effects do not form an orthogonal projection family: {0}")]
    NotProjective(String),
    #[error("invalid construction: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
