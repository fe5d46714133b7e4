use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("local dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("state of dimension {dim}^{sites} exceeds the {max} amplitude cap")]
    SizeCap { dim: usize, sites: usize, max: usize },

    #[error("value {value} out of range for local dimension {dim}")]
    ValueOutOfRange { value: usize, dim: usize },

    #[error("local dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid site selection: {0}")]
    InvalidSites(String),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("amplitudes are not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid protocol parameters: {0}")]
    InvalidParameters(String),

    #[error("outcome {outcome:?} is not a valid outcome of {protocol}")]
    UnknownOutcome { protocol: String, outcome: Vec<usize> },

    #[error("network error: {0}")]
    Network(String),

    #[error("terminals are not connected: {0}")]
    Disconnected(String),

    #[error("missing elementary resource on tree edge {0}-{1}")]
    MissingResource(u32, u32),

    #[error("step {step} needs {sites} live sites at d={dim}, over the simulation cap; use symbolic mode")]
    ScheduleTooLarge { step: usize, sites: usize, dim: usize },

    #[error("ledger inconsistency: {0}")]
    Ledger(String),

    #[error("singular transfer matrix (F0={f0}, F1={f1})")]
    SingularMatrix { f0: f64, f1: f64 },

    #[error("invalid readout data: {0}")]
    Readout(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
