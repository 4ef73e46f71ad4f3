use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("mesh quality failure: {0}")]
    MeshQuality(String),
    #[error("incompatible data: {0}")]
    IncompatibleData(String),
    #[error("linear solver failure: {0}")]
    SolverFailure(String),
    #[error("particle left the evaluation domain: {0}")]
    OutOfDomain(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = ShapeError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> ShapeError {
    ShapeError::InvalidArgument(msg.into())
}
