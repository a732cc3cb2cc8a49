use crate::metric::PointId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} is unknown or not live")]
    NotFound(PointId),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("distance bounds violated: {0}")]
    BoundsViolation(String),

    #[error("not a metric: {0}")]
    MetricViolation(String),

    #[error("invariant failed: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("stream parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
