//! Experiment declarations: which problems, which optimizers, how many
//! seeded repeats.

use serde::{Deserialize, Serialize};

use ohm_core::benchmarks::{make_benchmark, BenchmarkId, DimRule};
use ohm_core::hybrid::GradProblem;
use ohm_core::wcsp::{synth_trials, PencilSolver, WcspInstance};
use ohm_core::Problem;

use crate::optimizers::OptimizerSpec;
use crate::{Error, Result};

fn default_runs() -> usize {
    20
}

fn default_master_seed() -> u64 {
    42
}

fn default_nfe() -> u64 {
    30_000
}

fn default_dim() -> usize {
    3
}

fn default_wcsp_trials() -> usize {
    10
}

fn default_wcsp_channels() -> usize {
    8
}

fn default_wcsp_samples() -> usize {
    128
}

fn default_wcsp_separation() -> f64 {
    0.6
}

fn default_wcsp_class() -> usize {
    1
}

/// One problem column of the experiment matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// A catalog test function instantiated at a dimension.
    Benchmark {
        /// Catalog id: "F7", "7", or a name such as "Schwefel".
        id: String,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_nfe")]
        nfe: u64,
    },
    /// A synthetic trial-weighting instance; its decision space is the
    /// doubled trial-weight vector on the unit box.
    Wcsp {
        /// Seed of the synthetic trial generator; fully determines the
        /// instance.
        seed: u64,
        #[serde(default = "default_wcsp_trials")]
        n_trials: usize,
        #[serde(default = "default_wcsp_channels")]
        n_channels: usize,
        #[serde(default = "default_wcsp_samples")]
        n_samples: usize,
        #[serde(default = "default_wcsp_separation")]
        class_separation: f64,
        #[serde(default = "default_wcsp_class")]
        class: usize,
        #[serde(default)]
        solver: PencilSolver,
        #[serde(default = "default_nfe")]
        nfe: u64,
    },
}

impl ProblemSpec {
    pub fn benchmark(id: &str, dim: usize, nfe: u64) -> Self {
        ProblemSpec::Benchmark {
            id: id.into(),
            dim,
            nfe,
        }
    }

    /// Stable identity used for the results table and per-run seed
    /// derivation.
    pub fn key(&self) -> Result<String> {
        match self {
            ProblemSpec::Benchmark { id, dim, .. } => {
                let id = BenchmarkId::parse(id)?;
                Ok(format!("{}-d{dim}", id.name()))
            }
            ProblemSpec::Wcsp { seed, .. } => Ok(format!("wcsp-s{seed}")),
        }
    }

    pub fn nfe(&self) -> u64 {
        match *self {
            ProblemSpec::Benchmark { nfe, .. } | ProblemSpec::Wcsp { nfe, .. } => nfe,
        }
    }

    /// Materializes the spec. `transform_seed` fixes rotations and shifts of
    /// transformed benchmarks; plain entries ignore it.
    pub fn build(&self, transform_seed: u64) -> Result<BuiltProblem> {
        let key = self.key()?;
        match self {
            ProblemSpec::Benchmark { id, dim, nfe } => {
                let id = BenchmarkId::parse(id)?;
                let problem = make_benchmark(id, *dim, transform_seed)?;
                let target = problem.known_optimum().map(|(_, v)| v);
                let grad = GradProblem::from_problem(problem.clone());
                Ok(BuiltProblem {
                    key,
                    dim: *dim,
                    nfe: *nfe,
                    problem,
                    grad,
                    target,
                })
            }
            ProblemSpec::Wcsp {
                seed,
                n_trials,
                n_channels,
                n_samples,
                class_separation,
                class,
                solver,
                nfe,
            } => {
                let trials =
                    synth_trials(*seed, *n_trials, *n_channels, *n_samples, *class_separation)?;
                let instance = WcspInstance::new(trials, *class, *solver, *seed)?;
                let problem = instance.to_problem();
                let grad = instance.to_grad_problem();
                Ok(BuiltProblem {
                    key,
                    dim: problem.dim(),
                    nfe: *nfe,
                    problem,
                    grad,
                    target: None,
                })
            }
        }
    }
}

/// A materialized problem: the plain view for the population optimizers, the
/// gradient view for the descent hybrids, and the error reference.
pub struct BuiltProblem {
    pub key: String,
    pub dim: usize,
    pub nfe: u64,
    pub problem: Problem,
    pub grad: GradProblem,
    /// Known optimum value; errors are reported as `|best - target|`. `None`
    /// reports the raw best cost instead.
    pub target: Option<f64>,
}

impl BuiltProblem {
    /// The figure recorded in the results table for a finished run.
    pub fn error_of(&self, best_cost: f64) -> f64 {
        match self.target {
            Some(t) => (best_cost - t).abs(),
            None => best_cost,
        }
    }
}

/// Full experiment declaration; serializes as the CLI's JSON config format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemSpec>,
    pub optimizers: Vec<OptimizerSpec>,
    #[serde(default = "default_runs")]
    pub runs_per_cell: usize,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() {
            return Err(Error::Config("no problems configured".into()));
        }
        if self.optimizers.is_empty() {
            return Err(Error::Config("no optimizers configured".into()));
        }
        if self.runs_per_cell == 0 {
            return Err(Error::Config("runs_per_cell must be positive".into()));
        }
        if self.problems.iter().any(|p| p.nfe() == 0) {
            return Err(Error::Config(
                "every problem needs a positive budget".into(),
            ));
        }
        let mut keys: Vec<String> = self
            .problems
            .iter()
            .map(|p| p.key())
            .collect::<Result<_>>()?;
        keys.sort();
        keys.dedup();
        if keys.len() != self.problems.len() {
            return Err(Error::Config("duplicate problem entries".into()));
        }
        let mut names: Vec<&str> = self.optimizers.iter().map(|o| o.key()).collect();
        names.sort();
        names.dedup();
        if names.len() != self.optimizers.len() {
            return Err(Error::Config("duplicate optimizer entries".into()));
        }
        for o in &self.optimizers {
            o.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Built-in experiment shapes selectable from the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Every catalog function against the four population optimizers at the
    /// small budget: dimension 3 (2 where the function demands it),
    /// 30000 evaluations, 20 runs.
    Desk,
    /// The four classic multimodal functions against the population
    /// optimizers and both self-tuning variants.
    Multimodal,
    /// One synthetic trial-weighting instance against the descent hybrids.
    Hybrid,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "multimodal" => Ok(Preset::Multimodal),
            "hybrid" => Ok(Preset::Hybrid),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected desk, multimodal, or hybrid)"
            ))),
        }
    }

    pub fn config(self) -> ExperimentConfig {
        match self {
            Preset::Desk => ExperimentConfig {
                problems: BenchmarkId::all()
                    .map(|id| {
                        let dim = preferred_dim(id, default_dim());
                        ProblemSpec::benchmark(id.name(), dim, default_nfe())
                    })
                    .collect(),
                optimizers: vec![
                    OptimizerSpec::pso(),
                    OptimizerSpec::ica(),
                    OptimizerSpec::ohmpso(),
                    OptimizerSpec::ohmica(),
                ],
                runs_per_cell: default_runs(),
                master_seed: default_master_seed(),
            },
            Preset::Multimodal => ExperimentConfig {
                problems: ["Ackley", "Rastrigin", "Griewank", "Schwefel"]
                    .iter()
                    .map(|name| ProblemSpec::benchmark(name, default_dim(), default_nfe()))
                    .collect(),
                optimizers: vec![
                    OptimizerSpec::pso(),
                    OptimizerSpec::ica(),
                    OptimizerSpec::ohmpso(),
                    OptimizerSpec::ohmica(),
                    OptimizerSpec::ohmpso_st(),
                    OptimizerSpec::ohmica_st(),
                ],
                runs_per_cell: default_runs(),
                master_seed: default_master_seed(),
            },
            Preset::Hybrid => ExperimentConfig {
                problems: vec![ProblemSpec::Wcsp {
                    seed: crate::runner::WCSP_REFERENCE_SEED,
                    n_trials: default_wcsp_trials(),
                    n_channels: default_wcsp_channels(),
                    n_samples: default_wcsp_samples(),
                    class_separation: default_wcsp_separation(),
                    class: default_wcsp_class(),
                    solver: PencilSolver::default(),
                    nfe: 10_000,
                }],
                optimizers: vec![
                    OptimizerSpec::gd(),
                    OptimizerSpec::gpso(),
                    OptimizerSpec::ohmpso_gd(),
                ],
                runs_per_cell: default_runs(),
                master_seed: default_master_seed(),
            },
        }
    }
}

/// The requested dimension where the function supports it, its fixed
/// dimension otherwise.
pub fn preferred_dim(id: BenchmarkId, requested: usize) -> usize {
    let rule = ohm_core::benchmarks::registry(0)[id.index() as usize - 1].dim_rule;
    match rule {
        DimRule::Exactly2 => 2,
        DimRule::AnyAtLeast2 => requested.max(2),
    }
}
