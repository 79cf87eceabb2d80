use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {0} outside the Bessel evaluation envelope (|w| <= {1}, |Im w| <= {2})")]
    OutOfEnvelope(Complex64, f64, f64),

    #[error("non-finite argument {0}")]
    NonFinite(Complex64),

    #[error("derivative order {0} exceeds the supported bound {1}")]
    DerivativeOrderTooHigh(u32, u32),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("contour passes within {clearance:e} of a zero (min |G| on boundary = {min_abs:e})")]
    BoundaryTooClose { min_abs: f64, clearance: f64 },

    #[error("winding value {0} is not within 0.1 of an integer")]
    NonIntegerWinding(f64),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("quadrature did not converge: last two-resolution difference {0:e}")]
    NonConvergence(f64),

    #[error("lambda {0} too small for the 1/lambda closed form")]
    LambdaTooSmall(Complex64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 1 contract failure, 2 usage or validation, 3 numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Certification(_) => 1,
            Error::InvalidParams(_)
            | Error::Precondition(_)
            | Error::LambdaTooSmall(_)
            | Error::OutOfEnvelope(..)
            | Error::DerivativeOrderTooHigh(..)
            | Error::Io(_)
            | Error::Format(_) => 2,
            Error::NonConvergence(_)
            | Error::NonIntegerWinding(_)
            | Error::BoundaryTooClose { .. }
            | Error::NonFinite(_) => 3,
        }
    }
}
