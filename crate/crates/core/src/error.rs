use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{func}: argument {value} outside domain ({expected})")]
    Domain {
        func: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The closed form needs 0 < beta < 1; the caller must take the explicit branch.
    #[error("degenerate CSI model (beta = {beta}): closed form requires 0 < beta < 1")]
    DegenerateCsi { beta: f64 },

    #[error("relaxed interference CDF is singular at x = {x} (r^2 = {r_squared:e})")]
    Singular { x: f64, r_squared: f64 },

    #[error("invalid rate schedule: {0}")]
    RateSchedule(String),

    /// `pi = 1` under imperfect CSI: no positive threshold meets the constraint.
    #[error("interference confidence {pi} cannot be met with beta = {beta}")]
    InfeasibleConfidence { pi: f64, beta: f64 },

    #[error("empirical CDF needs at least one sample")]
    EmptySamples,

    #[error("quadrature failed to reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_finite(func: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            func,
            value,
            expected: "finite",
        })
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}
