use std::path::PathBuf;

use crate::basis::ChargeReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used for CLI exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: geometry, parameters, charges, configuration.
    Validation,
    /// Resource guard or numerical non-convergence.
    Capacity,
    /// Filesystem failure.
    Io,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("charge configuration rejected:\n{0}")]
    Charges(ChargeReport),

    #[error("{what} requires the {expected} picture")]
    PictureMismatch { what: &'static str, expected: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("basis of {needed} states exceeds the capacity of {cap}")]
    Capacity { needed: u128, cap: usize },

    #[error("empty basis: nothing to diagonalize")]
    EmptyBasis,

    #[error("dense diagonalization refused: dimension {dim} exceeds cap {cap}")]
    DenseCap { dim: usize, cap: usize },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular resolvent: an intermediate state outside the Gauss sector has zero Gauss energy")]
    SingularResolvent,

    #[error("vector length {got} does not match operator dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state norm deviates from one by {0:e}")]
    NotNormalized(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Capacity { .. }
            | Error::EmptyBasis
            | Error::DenseCap { .. }
            | Error::NotConverged { .. }
            | Error::SingularResolvent => ErrorClass::Capacity,
            Error::Io { .. } => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
