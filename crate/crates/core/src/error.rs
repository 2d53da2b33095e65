use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The evaluation budget is spent. Runners treat this as a normal stop.
    #[error("evaluation budget exhausted")]
    BudgetExhausted,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid range: lo {lo} > hi {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("population is empty")]
    EmptyPopulation,

    /// An exclusion selector found nothing to select. Callers fall back to
    /// the entailing organization.
    #[error("no candidate organization")]
    NoCandidate,

    #[error("organization has no live solutions")]
    EmptyOrganization,

    #[error("unknown benchmark: {0}")]
    UnknownBenchmark(String),

    #[error("{name} does not support dimension {dim}")]
    UnsupportedDim { name: String, dim: usize },

    #[error("trial covariance is degenerate")]
    DegenerateTrial,

    #[error("pencil matrix is ill-conditioned")]
    IllConditioned,

    #[error("gradient contains non-finite components")]
    NonFiniteGradient,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
