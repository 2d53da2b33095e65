//! Seeded execution of the experiment matrix.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ohm_core::rng::derive_seed;
use ohm_core::{Budget, RngStream};

use crate::config::ExperimentConfig;
use crate::{stats, Result};

/// Seed of the synthetic trial-weighting instance the hybrid preset and the
/// acceptance suite share. Fixed so the instance is the same everywhere.
pub const WCSP_REFERENCE_SEED: u64 = 104_729;

/// One problem × optimizer cell: the raw per-run results, in run order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub problem: String,
    pub dim: usize,
    /// Configured evaluation budget per run.
    pub nfe: u64,
    pub optimizer: String,
    /// Per-run error: distance to the known optimum value, or the raw best
    /// cost when none is known. A failed run records NaN.
    pub errors: Vec<f64>,
    /// Per-run failure reason; `None` marks a clean run.
    pub failures: Vec<Option<String>>,
    /// Evaluations actually spent per run.
    pub nfe_used: Vec<u64>,
    pub wall_ms: Vec<f64>,
}

impl CellResult {
    pub fn mean(&self) -> f64 {
        stats::mean(&self.errors)
    }

    pub fn std(&self) -> f64 {
        stats::population_std(&self.errors)
    }

    pub fn median(&self) -> f64 {
        stats::median(&self.errors)
    }
}

/// Runs the full matrix. Every run's seed derives from the master seed, the
/// problem key, the optimizer key, and the run index alone, so the outcome
/// is reproducible and independent of scheduling; runs execute on a worker
/// pool. Per-run failures are recorded in the owning cell and never abort
/// the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let built = cfg
        .problems
        .iter()
        .map(|p| p.build(cfg.master_seed))
        .collect::<Result<Vec<_>>>()?;

    struct RunOutcome {
        error: f64,
        failure: Option<String>,
        nfe_used: u64,
        wall_ms: f64,
    }

    let jobs: Vec<(usize, usize, usize)> = (0..built.len())
        .flat_map(|pi| {
            (0..cfg.optimizers.len())
                .flat_map(move |oi| (0..cfg.runs_per_cell).map(move |run| (pi, oi, run)))
        })
        .collect();

    let outcomes: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(pi, oi, run)| {
            let problem = &built[pi];
            let spec = &cfg.optimizers[oi];
            let run_tag = run.to_string();
            let seed = derive_seed(
                cfg.master_seed,
                &[problem.key.as_str(), spec.key(), run_tag.as_str()],
            );
            let mut rng = RngStream::new(seed);
            let mut budget = Budget::new(problem.nfe);
            let start = Instant::now();
            let outcome = spec.run(problem, &mut budget, &mut rng);
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            match outcome {
                Ok(r) => RunOutcome {
                    error: problem.error_of(r.best_cost),
                    failure: None,
                    nfe_used: r.nfe_used,
                    wall_ms,
                },
                Err(e) => RunOutcome {
                    error: f64::NAN,
                    failure: Some(e.to_string()),
                    nfe_used: budget.nfe_used(),
                    wall_ms,
                },
            }
        })
        .collect();

    // Jobs were laid out problem-major, optimizer-next, run-minor; fold the
    // flat outcome list back into cells in that order.
    let mut cells = Vec::with_capacity(built.len() * cfg.optimizers.len());
    let mut next = outcomes.into_iter();
    for problem in &built {
        for spec in &cfg.optimizers {
            let mut cell = CellResult {
                problem: problem.key.clone(),
                dim: problem.dim,
                nfe: problem.nfe,
                optimizer: spec.key().into(),
                errors: Vec::with_capacity(cfg.runs_per_cell),
                failures: Vec::with_capacity(cfg.runs_per_cell),
                nfe_used: Vec::with_capacity(cfg.runs_per_cell),
                wall_ms: Vec::with_capacity(cfg.runs_per_cell),
            };
            for _ in 0..cfg.runs_per_cell {
                let o = next.next().expect("one outcome per job");
                cell.errors.push(o.error);
                cell.failures.push(o.failure);
                cell.nfe_used.push(o.nfe_used);
                cell.wall_ms.push(o.wall_ms);
            }
            cells.push(cell);
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemSpec;
    use crate::optimizers::OptimizerSpec;

    fn tiny(optimizers: Vec<OptimizerSpec>, runs: usize, nfe: u64) -> ExperimentConfig {
        ExperimentConfig {
            problems: vec![ProblemSpec::benchmark("Sphere", 3, nfe)],
            optimizers,
            runs_per_cell: runs,
            master_seed: 11,
        }
    }

    #[test]
    fn minimal_experiment_yields_one_cell_with_one_error() {
        let cells = run_experiment(&tiny(vec![OptimizerSpec::pso()], 1, 500)).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].errors.len(), 1);
        assert!(cells[0].errors[0].is_finite());
        assert_eq!(cells[0].failures[0], None);
        assert_eq!(cells[0].nfe_used[0], 500);
    }

    #[test]
    fn rerun_with_the_same_master_seed_repeats_raw_errors() {
        let cfg = tiny(vec![OptimizerSpec::pso(), OptimizerSpec::ohmpso()], 3, 1200);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.errors, y.errors);
            assert_eq!(x.nfe_used, y.nfe_used);
        }
        let mut other = cfg.clone();
        other.master_seed = 12;
        let c = run_experiment(&other).unwrap();
        assert_ne!(a[0].errors, c[0].errors);
    }

    #[test]
    fn inserting_an_optimizer_leaves_other_cells_untouched() {
        let alone = run_experiment(&tiny(vec![OptimizerSpec::pso()], 3, 800)).unwrap();
        let joined = run_experiment(&tiny(
            vec![OptimizerSpec::ica(), OptimizerSpec::pso()],
            3,
            800,
        ))
        .unwrap();
        let pso_cell = joined.iter().find(|c| c.optimizer == "pso").unwrap();
        assert_eq!(alone[0].errors, pso_cell.errors);
    }

    #[test]
    fn a_failing_run_is_recorded_not_fatal() {
        // The hierarchy cannot seed its 200 members from 50 evaluations, so
        // every ohmpso run fails; pso still reports clean runs.
        let cells = run_experiment(&tiny(
            vec![OptimizerSpec::ohmpso(), OptimizerSpec::pso()],
            2,
            50,
        ))
        .unwrap();
        let ohm = cells.iter().find(|c| c.optimizer == "ohmpso").unwrap();
        assert!(ohm.errors.iter().all(|e| e.is_nan()));
        assert!(ohm.failures.iter().all(|f| f.is_some()));
        let pso = cells.iter().find(|c| c.optimizer == "pso").unwrap();
        assert!(pso.errors.iter().all(|e| e.is_finite()));
        assert!(pso.failures.iter().all(|f| f.is_none()));
    }
}
