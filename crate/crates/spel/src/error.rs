use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Mismatched dimensions between related inputs.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The score covariance is singular or numerically indefinite, so
    /// Mahalanobis geometry is unavailable. Callers should treat this as a
    /// data problem (duplicated or constant policy columns), not a bug.
    #[error("degenerate score covariance: {0}")]
    DegenerateCovariance(String),

    /// A rejection-sampling generator exhausted its resample budget.
    #[error("generation failed: {0}")]
    GenerationFailed(String),

    /// A nuisance model could not be fit on a training fold.
    #[error("nuisance fit failed: {0}")]
    FitFailed(String),

    /// An internal solver failed to converge. Indicates a pathological
    /// instance; never expected on well-conditioned inputs.
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
