use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Which of the two random variables an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => f.write_str("X"),
            Axis::Y => f.write_str("Y"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid box [{a}, {b}] x [{c}, {d}]: need finite a < b and c < d")]
    InvalidBox { a: f64, b: f64, c: f64, d: f64 },

    #[error("mean of {axis} = {mean} lies outside [{lo}, {hi}]")]
    MeanOutOfRange {
        axis: Axis,
        mean: f64,
        lo: f64,
        hi: f64,
    },

    #[error("variance of {axis} = {var} is infeasible (maximum {max})")]
    VarianceInfeasible { axis: Axis, var: f64, max: f64 },

    #[error("moment set is incomplete: {0}")]
    IncompleteMoments(String),

    #[error("operation needs the {expected} regime, got {actual}")]
    RegimeMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("covariance {cov} lies outside the feasible interval [{lower}, {upper}]")]
    CovarianceOutOfRange { cov: f64, lower: f64, upper: f64 },

    #[error("standardized measure `{0}` is undefined")]
    UndefinedMeasure(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid problem: {0}")]
    InvalidProblem(String),

    #[error("linear program did not converge: {0}")]
    SolverFailure(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidBox { .. } => "INVALID_BOX",
            Error::MeanOutOfRange { .. } => "MEAN_OUT_OF_RANGE",
            Error::VarianceInfeasible { .. } => "VARIANCE_INFEASIBLE",
            Error::IncompleteMoments(_) => "INCOMPLETE_MOMENTS",
            Error::RegimeMismatch { .. } => "REGIME_MISMATCH",
            Error::CovarianceOutOfRange { .. } => "COV_OUT_OF_RANGE",
            Error::UndefinedMeasure(_) => "UNDEFINED_MEASURE",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::InvalidProblem(_) => "INVALID_PROBLEM",
            Error::SolverFailure(_) => "SOLVER_FAILURE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
