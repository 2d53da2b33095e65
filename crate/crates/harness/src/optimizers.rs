//! The optimizer registry: every named algorithm the experiment runner can
//! execute, with its tunable configuration.

use serde::{Deserialize, Serialize};

use ohm_core::hybrid::{gpso_run, ohm_gd_run, AdamConfig, Initializer};
use ohm_core::ica::{ica_run, IcaConfig};
use ohm_core::ohm::{ohm_run, OhmConfig, OhmVariant};
use ohm_core::pso::{pso_run, PsoConfig};
use ohm_core::{Budget, RngStream, RunResult};

use crate::config::BuiltProblem;
use crate::Result;

fn ohmpso_cfg() -> OhmConfig {
    OhmConfig::variant(OhmVariant::OhmPso)
}

fn ohmica_cfg() -> OhmConfig {
    OhmConfig::variant(OhmVariant::OhmIca)
}

fn ohmpso_st_cfg() -> OhmConfig {
    OhmConfig::variant(OhmVariant::OhmPsoSt)
}

fn ohmica_st_cfg() -> OhmConfig {
    OhmConfig::variant(OhmVariant::OhmIcaSt)
}

/// Descent defaults for experiment runs: the round-convergence early stop is
/// disabled and the round cap is effectively infinite, so every run spends
/// its full evaluation budget and the recorded `nfe_used` always equals the
/// configured budget.
fn experiment_adam() -> AdamConfig {
    AdamConfig {
        convergence_gamma: 0.0,
        max_rounds: 1_000_000_000,
        ..AdamConfig::default()
    }
}

fn default_n_g() -> usize {
    5
}

/// A named, configured optimizer. The serde tag doubles as the optimizer's
/// identity in result tables and per-run seed derivation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum OptimizerSpec {
    Pso {
        #[serde(default)]
        config: PsoConfig,
    },
    Ica {
        #[serde(default)]
        config: IcaConfig,
    },
    Ohmpso {
        #[serde(default = "ohmpso_cfg")]
        config: OhmConfig,
    },
    Ohmica {
        #[serde(default = "ohmica_cfg")]
        config: OhmConfig,
    },
    OhmpsoSt {
        #[serde(default = "ohmpso_st_cfg")]
        config: OhmConfig,
    },
    OhmicaSt {
        #[serde(default = "ohmica_st_cfg")]
        config: OhmConfig,
    },
    /// Multi-start Adam descent from uniform random seeds.
    Gd {
        #[serde(default = "experiment_adam")]
        adam: AdamConfig,
    },
    /// Adam descent re-seeded by a particle swarm every `n_g` rounds.
    Gpso {
        #[serde(default = "experiment_adam")]
        adam: AdamConfig,
        #[serde(default)]
        pso: PsoConfig,
        #[serde(default = "default_n_g")]
        n_g: usize,
    },
    OhmpsoGd {
        #[serde(default = "experiment_adam")]
        adam: AdamConfig,
        #[serde(default = "ohmpso_cfg")]
        ohm: OhmConfig,
    },
    OhmicaGd {
        #[serde(default = "experiment_adam")]
        adam: AdamConfig,
        #[serde(default = "ohmica_cfg")]
        ohm: OhmConfig,
    },
    IcaGd {
        #[serde(default = "experiment_adam")]
        adam: AdamConfig,
        #[serde(default)]
        ica: IcaConfig,
    },
}

impl OptimizerSpec {
    pub fn pso() -> Self {
        OptimizerSpec::Pso {
            config: PsoConfig::default(),
        }
    }

    pub fn ica() -> Self {
        OptimizerSpec::Ica {
            config: IcaConfig::default(),
        }
    }

    pub fn ohmpso() -> Self {
        OptimizerSpec::Ohmpso {
            config: ohmpso_cfg(),
        }
    }

    pub fn ohmica() -> Self {
        OptimizerSpec::Ohmica {
            config: ohmica_cfg(),
        }
    }

    pub fn ohmpso_st() -> Self {
        OptimizerSpec::OhmpsoSt {
            config: ohmpso_st_cfg(),
        }
    }

    pub fn ohmica_st() -> Self {
        OptimizerSpec::OhmicaSt {
            config: ohmica_st_cfg(),
        }
    }

    pub fn gd() -> Self {
        OptimizerSpec::Gd {
            adam: experiment_adam(),
        }
    }

    pub fn gpso() -> Self {
        OptimizerSpec::Gpso {
            adam: experiment_adam(),
            pso: PsoConfig::default(),
            n_g: default_n_g(),
        }
    }

    pub fn ohmpso_gd() -> Self {
        OptimizerSpec::OhmpsoGd {
            adam: experiment_adam(),
            ohm: ohmpso_cfg(),
        }
    }

    pub fn ohmica_gd() -> Self {
        OptimizerSpec::OhmicaGd {
            adam: experiment_adam(),
            ohm: ohmica_cfg(),
        }
    }

    pub fn ica_gd() -> Self {
        OptimizerSpec::IcaGd {
            adam: experiment_adam(),
            ica: IcaConfig::default(),
        }
    }

    /// Every registered optimizer with its default configuration, in listing
    /// order.
    pub fn all() -> Vec<OptimizerSpec> {
        vec![
            Self::pso(),
            Self::ica(),
            Self::ohmpso(),
            Self::ohmica(),
            Self::ohmpso_st(),
            Self::ohmica_st(),
            Self::gd(),
            Self::gpso(),
            Self::ohmpso_gd(),
            Self::ohmica_gd(),
            Self::ica_gd(),
        ]
    }

    /// Builds the named optimizer with default configuration.
    pub fn by_name(name: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|o| o.key() == name)
            .ok_or_else(|| crate::Error::Config(format!("unknown optimizer '{name}'")))
    }

    /// Stable identity used for result tables and per-run seed derivation;
    /// equals the serde tag.
    pub fn key(&self) -> &'static str {
        match self {
            OptimizerSpec::Pso { .. } => "pso",
            OptimizerSpec::Ica { .. } => "ica",
            OptimizerSpec::Ohmpso { .. } => "ohmpso",
            OptimizerSpec::Ohmica { .. } => "ohmica",
            OptimizerSpec::OhmpsoSt { .. } => "ohmpso-st",
            OptimizerSpec::OhmicaSt { .. } => "ohmica-st",
            OptimizerSpec::Gd { .. } => "gd",
            OptimizerSpec::Gpso { .. } => "gpso",
            OptimizerSpec::OhmpsoGd { .. } => "ohmpso-gd",
            OptimizerSpec::OhmicaGd { .. } => "ohmica-gd",
            OptimizerSpec::IcaGd { .. } => "ica-gd",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            OptimizerSpec::Pso { .. } => "particle swarm with linearly decaying inertia",
            OptimizerSpec::Ica { .. } => "imperialist competition over colony empires",
            OptimizerSpec::Ohmpso { .. } => "hierarchy search aiming at the own organization chain",
            OptimizerSpec::Ohmica { .. } => {
                "hierarchy search aiming at the best rival organization"
            }
            OptimizerSpec::OhmpsoSt { .. } => {
                "own-chain hierarchy search with self-tuned level weights"
            }
            OptimizerSpec::OhmicaSt { .. } => {
                "rival-roulette hierarchy search with self-tuned level weights"
            }
            OptimizerSpec::Gd { .. } => "multi-start Adam descent from uniform seeds",
            OptimizerSpec::Gpso { .. } => "Adam descent re-seeded by a particle swarm",
            OptimizerSpec::OhmpsoGd { .. } => "Adam descent re-seeded by the own-chain hierarchy",
            OptimizerSpec::OhmicaGd { .. } => "Adam descent re-seeded by the rival-aim hierarchy",
            OptimizerSpec::IcaGd { .. } => "Adam descent re-seeded by imperialist competition",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OptimizerSpec::Pso { config } => config.validate()?,
            OptimizerSpec::Ica { config } => config.validate()?,
            OptimizerSpec::Ohmpso { config }
            | OptimizerSpec::Ohmica { config }
            | OptimizerSpec::OhmpsoSt { config }
            | OptimizerSpec::OhmicaSt { config } => config.validate()?,
            OptimizerSpec::Gd { adam } => adam.validate()?,
            OptimizerSpec::Gpso { adam, pso, n_g } => {
                adam.validate()?;
                pso.validate()?;
                if *n_g == 0 {
                    return Err(crate::Error::Config("n_g must be positive".into()));
                }
            }
            OptimizerSpec::OhmpsoGd { adam, ohm } | OptimizerSpec::OhmicaGd { adam, ohm } => {
                adam.validate()?;
                ohm.validate()?;
            }
            OptimizerSpec::IcaGd { adam, ica } => {
                adam.validate()?;
                ica.validate()?;
            }
        }
        Ok(())
    }

    /// Executes one run against the problem until the budget is exhausted.
    pub fn run(
        &self,
        built: &BuiltProblem,
        budget: &mut Budget,
        rng: &mut RngStream,
    ) -> ohm_core::Result<RunResult> {
        match self {
            OptimizerSpec::Pso { config } => pso_run(&built.problem, budget, config, rng),
            OptimizerSpec::Ica { config } => ica_run(&built.problem, budget, config, rng),
            OptimizerSpec::Ohmpso { config }
            | OptimizerSpec::Ohmica { config }
            | OptimizerSpec::OhmpsoSt { config }
            | OptimizerSpec::OhmicaSt { config } => ohm_run(&built.problem, budget, config, rng),
            OptimizerSpec::Gd { adam } => {
                ohm_gd_run(&built.grad, budget, adam, &Initializer::None, rng).map(|h| h.result)
            }
            OptimizerSpec::Gpso { adam, pso, n_g } => {
                gpso_run(&built.grad, budget, adam, pso, *n_g, rng).map(|h| h.result)
            }
            OptimizerSpec::OhmpsoGd { adam, ohm } | OptimizerSpec::OhmicaGd { adam, ohm } => {
                ohm_gd_run(
                    &built.grad,
                    budget,
                    adam,
                    &Initializer::Ohm(ohm.clone()),
                    rng,
                )
                .map(|h| h.result)
            }
            OptimizerSpec::IcaGd { adam, ica } => ohm_gd_run(
                &built.grad,
                budget,
                adam,
                &Initializer::Ica(ica.clone()),
                rng,
            )
            .map(|h| h.result),
        }
    }
}
