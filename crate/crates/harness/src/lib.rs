//! Experiment harness for the `ohm-core` optimizers.
//!
//! The harness turns a declarative [`ExperimentConfig`] (problems ×
//! optimizers × seeded repeats) into a matrix of [`CellResult`]s, computes
//! rank statistics across optimizers, and exports raw errors as CSV and
//! summary grids as JSON or markdown. Per-run seeds derive from the master
//! seed and the cell's identity alone, so results are reproducible and
//! adding an optimizer never disturbs the other cells.

mod config;
mod export;
mod optimizers;
mod runner;
mod stats;

pub use config::{preferred_dim, BuiltProblem, ExperimentConfig, Preset, ProblemSpec};
pub use export::{export_csv, export_json, export_markdown, load_csv, CsvRow};
pub use optimizers::OptimizerSpec;
pub use runner::{run_experiment, CellResult, WCSP_REFERENCE_SEED};
pub use stats::{
    mean, mean_std_label, median, population_std, rank_table, sci2, RankRow, RankTable,
};

/// Harness-level failures. Runtime failures of individual runs never raise
/// these; they are recorded in the owning [`CellResult`] instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ohm_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 2 for configuration problems, 3 for I/O problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) | Error::Csv(_) => 3,
            Error::Config(_) | Error::Core(_) | Error::Json(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
