use thiserror::Error;

/// Errors raised by the discrimination toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("dimension mismatch: {0}")]
    DimensionError(String),

    #[error("Bloch vector has norm {0} > 1")]
    InvalidBlochVector(f64),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("outcome {outcome} has probability {probability:e}, posterior is undefined")]
    ZeroProbabilityOutcome { outcome: usize, probability: f64 },

    #[error("projectors are not an orthogonal resolution of the identity: {0}")]
    IncompleteProjectors(String),

    #[error("invalid statistical realization: {0}")]
    InvalidRealization(String),

    #[error("dilation is not pure: {0}")]
    NotPureDilation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expected {expected} states, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("Kraus/projector condition violated: deviation {deviation:e} at outcome {outcome}")]
    ConditionNotSatisfied { outcome: usize, deviation: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
