use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument {value} outside the domain ({reason})")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{function}: result not representable at argument {value}")]
    Overflow { function: &'static str, value: f64 },

    #[error("csc: argument {x} lies within {distance:e} of a pole")]
    PoleProximity { x: f64, distance: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (best estimate {estimate}, error estimate {error_estimate:e})"
    )]
    NoConvergence {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("integrand returned a non-finite value at {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Short marker used in report cells.
    pub fn marker(&self) -> &'static str {
        match self {
            Error::PoleProximity { .. } => "POLE",
            Error::Overflow { .. } => "OVERFLOW",
            Error::NoConvergence { .. } | Error::NonFiniteIntegrand { .. } => "QUAD",
            Error::Domain { .. } | Error::InvalidParameter(_) => "DOMAIN",
        }
    }
}
