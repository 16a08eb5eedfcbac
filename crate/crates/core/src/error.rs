use std::path::PathBuf;

/// Errors produced while ingesting data, fitting, and exporting traces.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown column name `{0}`")]
    UnknownColumn(String),

    #[error("zero-variance column `{0}`")]
    ZeroVariance(String),

    #[error("non-numeric cell `{value}` in column `{column}` at data row {row}")]
    NonNumeric {
        column: String,
        row: usize,
        value: String,
    },

    #[error("need at least {required} observations, got {got}")]
    TooFewObservations { required: usize, got: usize },

    #[error("fat data unsupported: n = {n} observations for p = {p} predictors (need p < n)")]
    FatData { n: usize, p: usize },

    #[error("rank-deficient X: {deficient} of {p} singular values below relative tolerance")]
    RankDeficient { deficient: usize, p: usize },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("shrinkage factor {value} at position {index} is outside [0, 1]")]
    DeltaOutOfRange { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("probability {0} is outside (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("no inferior direction exists at the shrinkage terminus")]
    NoInferiorDirection,

    #[error("malformed CSV input: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
