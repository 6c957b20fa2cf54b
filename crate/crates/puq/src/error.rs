use thiserror::Error;

/// Errors shared across all modules of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PuError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("beta = {beta} is singular for this regime (within {tol} of an excluded point)")]
    SingularBeta { beta: f64, tol: f64 },

    #[error("operation unsupported in the harmonic regime (lambda = 0)")]
    HarmonicUnsupported,

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("wrong sector: {0}")]
    WrongSector(String),

    #[error("invalid integration setup: {0}")]
    InvalidIntegration(String),

    #[error("method incompatible with Hamiltonian form: {0}")]
    MethodIncompatible(String),
}

pub type Result<T> = std::result::Result<T, PuError>;
