use thiserror::Error;

/// Errors raised by model construction, explanation and estimation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("model needs at least one feature")]
    EmptyModel,

    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("stddev of feature {index} is negative ({value})")]
    NegativeStddev { index: usize, value: f64 },

    #[error("feature index {index} out of range for a model with {m} features")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("feature {index} has a zero coefficient and cannot be normalized")]
    ZeroCoefficient { index: usize },

    #[error(
        "model is not normalized (requires zero means and unit coefficients); call normalize first"
    )]
    NotNormalized,

    #[error("expected a {expected}-feature model, got {got}")]
    FeatureCount { expected: usize, got: usize },

    #[error(
        "exact enumeration supports at most {max} features, got {m}; use oracle::mc_shapley for sampled estimates"
    )]
    TooManyFeatures { m: usize, max: usize },

    #[error("{what} must be at least {min}, got {got}")]
    TooFewSamples {
        what: &'static str,
        min: u64,
        got: u64,
    },

    #[error("quadrature order {order} outside [{min}, {max}]")]
    OrderOutOfRange {
        order: usize,
        min: usize,
        max: usize,
    },

    #[error("quadrature did not converge: order {order} gave {value}, order {next_order} gave {next_value}")]
    NonConvergence {
        order: usize,
        value: f64,
        next_order: usize,
        next_value: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
