use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("{what} = {value} exceeds the enumeration guard of {limit}")]
    GuardExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("coefficient at index {0} is zero")]
    ZeroCoefficient(usize),

    #[error("profile violates property {property} at k = {k}: {detail}")]
    PropertyViolation {
        property: u8,
        k: usize,
        detail: String,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("quadrature did not converge after {evaluations} evaluations (estimate {estimate}, error {error})")]
    NoConvergence {
        estimate: String,
        error: String,
        evaluations: usize,
    },

    #[error("cannot parse `{input}` as a probability: {reason}")]
    Parse { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
