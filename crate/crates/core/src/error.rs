use core::fmt;

use crate::geometry::GeometryError;
use crate::oracles::OracleError;
use crate::problems::ProblemError;

/// Error of the solver-level entry points.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    Geometry(GeometryError),
    Problem(ProblemError),
    Oracle(OracleError),
    InvalidArgument(&'static str),
    /// The ellipsoid became too ill-conditioned to continue.
    Degenerate {
        iteration: usize,
        ratio: f64,
    },
    /// The horizon cannot pay for one inner round at the first escalation level.
    HorizonTooSmall {
        horizon: u64,
        minimum: u64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Geometry(e) => write!(f, "geometry: {e}"),
            Error::Problem(e) => write!(f, "problem: {e}"),
            Error::Oracle(e) => write!(f, "oracle: {e}"),
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::Degenerate { iteration, ratio } => {
                write!(f, "ellipsoid degenerated at iteration {iteration} (eigenvalue ratio {ratio:e})")
            }
            Error::HorizonTooSmall { horizon, minimum } => {
                write!(f, "horizon {horizon} is too small; at least {minimum} queries are needed")
            }
        }
    }
}

impl core::error::Error for Error {}

impl From<GeometryError> for Error {
    fn from(e: GeometryError) -> Self {
        Error::Geometry(e)
    }
}

impl From<ProblemError> for Error {
    fn from(e: ProblemError) -> Self {
        Error::Problem(e)
    }
}

impl From<OracleError> for Error {
    fn from(e: OracleError) -> Self {
        Error::Oracle(e)
    }
}
