use thiserror::Error;

/// Crate-wide error type.
///
/// Numeric payloads are carried as `f64` regardless of the scalar the
/// pipeline runs at, so the error type stays object-safe and printable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-stationary AR(2) coefficients phi1={phi1}, phi2={phi2}: characteristic roots must lie inside the unit circle")]
    NonStationaryAr { phi1: f64, phi2: f64 },

    #[error("mixture weights must be non-negative and sum to 1 (got sum {sum})")]
    BadMixtureWeights { sum: f64 },

    #[error("adherence {value} outside [{lo}, 1] for K={k}")]
    AdherenceOutOfRange { value: f64, lo: f64, k: usize },

    #[error("recording duration {duration_s}s shorter than one {segment_ms}ms segment")]
    DurationTooShort { duration_s: f64, segment_ms: u64 },

    #[error("subject {subject}: {available} segments available, epoch needs {needed}")]
    NotEnoughSegments {
        subject: usize,
        available: usize,
        needed: usize,
    },

    #[error("frequency grids do not match: {left} vs {right} bins (spacing {dl} vs {dr})")]
    GridMismatch {
        left: usize,
        right: usize,
        dl: f64,
        dr: f64,
    },

    #[error("affinity row {row} has zero degree; cannot normalize the Laplacian")]
    ZeroDegree { row: usize },

    #[error("requested {d} eigenvectors from a {p}x{p} matrix")]
    EmbeddingTooLarge { d: usize, p: usize },

    #[error("empty trace: {context}")]
    EmptyTrace { context: &'static str },

    #[error("joint log-density became non-finite at iteration {iteration}: {detail}")]
    DivergedChain { iteration: usize, detail: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("file format error in {path}: {detail}")]
    FileFormat { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
