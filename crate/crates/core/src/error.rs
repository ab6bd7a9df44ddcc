use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violates the heavy-tail model (negative spacings, unordered values).
    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("not implemented for {0}")]
    NotImplemented(String),

    /// A requested moment does not exist.
    #[error("moment of order {order} is infinite for {spec}")]
    InfiniteMoment { spec: String, order: u32 },

    /// Too few observations for the requested statistic.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Density-based operation requested for a law without a density.
    #[error("{0} is not absolutely continuous")]
    NotAbsolutelyContinuous(String),

    /// Monte Carlo tail estimate would rest on too few events.
    #[error("insufficient events: expected {expected:.3}, observed {observed}")]
    InsufficientEvents { expected: f64, observed: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by out-of-domain user arguments rather than
    /// runtime conditions.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Domain(_)
                | Error::Config(_)
                | Error::Parse(_)
                | Error::NotImplemented(_)
                | Error::Unsupported(_)
                | Error::NotAbsolutelyContinuous(_)
        )
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
