use thiserror::Error;

/// Errors raised by the geometric pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point is not on the unit sphere (norm {norm})")]
    NotOnSphere { norm: f64 },

    #[error("non-finite value encountered in {what}")]
    NonFinite { what: String },

    #[error("singular point: min eigenvalue of g - 2 Sch is {min_eig} (threshold {threshold})")]
    SingularPoint { min_eig: f64, threshold: f64 },

    #[error("no admissible dilation up to tau = {tau_max}; max |lambda| seen {max_abs_lambda}")]
    TauNotFound { tau_max: f64, max_abs_lambda: f64 },

    #[error("Schouten eigenvalue {value} is too close to zero")]
    ZeroEigenvalue { value: f64 },

    #[error("parallel flow is not regular: principal curvature {kappa} too close to +-1")]
    FlowNotRegular { kappa: f64 },

    #[error("not strongly H-convex: largest principal curvature {kappa_max} is not below -1")]
    NotStronglyConvex { kappa_max: f64 },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("grid degree {degree} is invalid: {reason}")]
    InvalidGrid { degree: usize, reason: String },

    #[error("Nirenberg solve did not converge ({status})")]
    NotConverged { status: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
