//! Optimization toolkit built around an organized hierarchy of search-space
//! regions.
//!
//! The crate provides:
//!
//! - [`problem`]: bounded continuous minimization problems with exact
//!   function-evaluation accounting.
//! - [`benchmarks`]: twenty standard test functions (F1..F20), including
//!   rotated and shifted variants built from seeded orthogonal transforms.
//! - [`pso`] and [`ica`]: particle swarm and imperialist competitive
//!   baselines.
//! - [`ohm`]: the organized hierarchical metaheuristic. A tree of
//!   organizations partitions the box; solutions move toward organization
//!   centers chosen by per-level roulette selection, with optional
//!   self-tuning of the level weights.
//! - [`hybrid`]: Adam-based gradient descent seeded by a metaheuristic
//!   initializer, with round-based re-initialization.
//! - [`wcsp`]: a trial-weighted spatial-filter objective over covariance
//!   pencils, with an analytic gradient for the hybrid optimizers.
//!
//! Every stochastic component draws from [`rng::RngStream`], so any run is
//! reproducible from its seed alone.

pub mod benchmarks;
mod error;
pub mod hybrid;
pub mod ica;
pub mod ohm;
pub mod problem;
pub mod pso;
pub mod result;
pub mod rng;
pub mod wcsp;

pub use error::Error;
pub use problem::{Budget, Problem};
pub use result::{BestTracker, RunResult};
pub use rng::RngStream;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
