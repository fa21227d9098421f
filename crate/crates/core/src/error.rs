use thiserror::Error;

/// Errors produced by state construction, channel handling and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("subsystem label `{0}` occurs in both operands")]
    LabelCollision(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    #[error("scale limit exceeded: {0}")]
    ScaleLimit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
