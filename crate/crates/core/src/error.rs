use thiserror::Error;

/// Errors reported by parameter validation, path construction and the
/// simulation drivers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Model or scale parameters outside their admissible ranges.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// A time argument outside the horizon, or otherwise out of domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A discretized path or control grid that violates its structural
    /// invariants (ordering, positivity, absorption consistency).
    #[error("invalid path: {0}")]
    InvalidPath(String),

    /// A simulation configuration whose pieces are individually valid but
    /// mutually inconsistent (e.g. an exact sampler asked for a drift tilt).
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
