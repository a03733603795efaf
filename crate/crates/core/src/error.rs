use thiserror::Error;

/// Errors raised by the planning toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {t} outside trajectory range [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("invalid derivative order {0}")]
    InvalidOrder(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("degenerate problem: {0}")]
    Degenerate(&'static str),
    #[error("singular boundary mapping on segment {segment}")]
    SingularSegment { segment: usize },
    #[error("reduced system is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid environment config: {0}")]
    Config(&'static str),
    #[error("start state is in collision or violates limits")]
    InvalidStart,
}

pub type Result<T> = core::result::Result<T, Error>;
