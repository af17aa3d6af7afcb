use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the thermodynamic routines.
///
/// Every variant carries the offending numbers so callers (and the CLI) can
/// name the state that caused it. [`Error::code`] gives a stable identifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("molar volume {v} lies outside the admissible domain ({lower}, {upper})")]
    Domain { v: f64, lower: f64, upper: f64 },

    #[error("mechanically unstable state (s = {s}, v = {v}): (dp/dv)_T = {dp_dv} is not negative")]
    Stability { s: f64, v: f64, dp_dv: f64 },

    #[error("metric is indefinite at (s = {s}, v = {v}): quadratic form {form} < 0")]
    IndefiniteMetric { s: f64, v: f64, form: f64 },

    #[error(
        "quadrature did not reach the requested accuracy within {budget} evaluations \
         (error estimate {error_estimate}, target {target})"
    )]
    Convergence {
        budget: usize,
        error_estimate: f64,
        target: f64,
    },

    #[error("{quantity} = {value} is out of range: {reason}")]
    Range {
        quantity: &'static str,
        value: f64,
        reason: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DOMAIN_ERROR",
            Error::Stability { .. } => "STABILITY_ERROR",
            Error::IndefiniteMetric { .. } => "INDEFINITE_METRIC",
            Error::Convergence { .. } => "CONVERGENCE_ERROR",
            Error::Range { .. } => "RANGE_ERROR",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
        }
    }

    /// The `(s, v)` state the failure refers to, when there is one.
    pub fn state(&self) -> Option<(f64, f64)> {
        match *self {
            Error::Stability { s, v, .. } | Error::IndefiniteMetric { s, v, .. } => Some((s, v)),
            _ => None,
        }
    }

    pub(crate) fn range(quantity: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::Range {
            quantity,
            value,
            reason: reason.into(),
        }
    }
}
