use num_complex::Complex64 as C64;
use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be even and positive")]
    OddSize(usize),

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("map is not expanding: inf T' = {inf_derivative:.6}")]
    NotExpanding { inf_derivative: f64 },

    #[error("Markov property violated: {0}")]
    NotMarkov(String),

    #[error("no eigenvalue within {tol:e} of target {target}")]
    EigenvalueNotFound { target: C64, tol: f64 },

    #[error("eigenvalue {value} is not simple (gap {gap:e})")]
    NonSimpleEigenvalue { value: C64, gap: f64 },

    #[error("complex eigenvalue {0} is not supported")]
    ComplexEigenvalue(C64),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("right-hand side is not mean-zero (|a_0| = {0:e})")]
    NotMeanZero(f64),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("invariant density is negative (min {0:e})")]
    NegativeDensity(f64),

    #[error("imaginary residue {residue:e} exceeds tolerance in {context}")]
    ImaginaryResidue { context: &'static str, residue: f64 },

    #[error("response context carries no eigen data")]
    MissingEigenData,

    #[error("degenerate pairing phi0(v0) = {0:e}")]
    DegeneratePairing(f64),

    #[error("objective vanishes uniformly (max numerator {max_numerator:e}); every feasible perturbation is optimal")]
    DegenerateObjective { max_numerator: f64 },

    #[error("optimality certificate violated: response {response} exceeds objective {objective}")]
    CertificateViolation { response: f64, objective: f64 },

    #[error("eigenvalue tracking ambiguous at delta = {delta:e}")]
    TrackingAmbiguous { delta: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse error classes, shared by the CLI exit codes and the C status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Degenerate,
    Validation,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::OddSize(_)
            | Error::SizeMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::UnknownPreset(_)
            | Error::Json(_)
            | Error::Io(_) => ErrorClass::Config,
            Error::DegenerateObjective { .. } => ErrorClass::Degenerate,
            Error::Validation(_) | Error::CertificateViolation { .. } => ErrorClass::Validation,
            _ => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
