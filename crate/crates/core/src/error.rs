use thiserror::Error;

/// Errors raised by the lattice, sampling, dynamics and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("lattice mismatch between operands")]
    LatticeMismatch,

    #[error("observation window violated: {0}")]
    WindowViolation(String),

    #[error("matrix at mode {mode} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { mode: usize, min_eigenvalue: f64 },

    #[error("support of radius {support} does not fit a box of length {box_length}")]
    SupportTooLarge { support: f64, box_length: f64 },

    #[error("correlation radius {scaled} is below lattice resolution {spacing}")]
    Unresolvable { scaled: f64, spacing: f64 },

    #[error("insufficient samples: need at least {required}, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("time step {dt} exceeds stability bound {bound}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
