use thiserror::Error;

use crate::states::Basis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis mismatch: expected {expected:?} basis, found {found:?}")]
    BasisMismatch { expected: Basis, found: Basis },

    #[error("parameter `{0}` must be nonzero")]
    ZeroParameter(&'static str),

    #[error("integration failed at dt = {dt:.3e}: {reason}")]
    Integration { dt: f64, reason: String },

    #[error("steady-state solve failed: {0}")]
    Solver(String),

    #[error("drive is not tuned to the selected subspace (phi_ell = {phi:.3e})")]
    MissingTuning { phi: f64 },

    #[error("population transfer is not exponential (R^2 = {r_squared:.4})")]
    NonExponential { r_squared: f64 },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
