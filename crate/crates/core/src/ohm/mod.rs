//! Population search over an organized hierarchy of search-space regions.
//!
//! The search box is recursively partitioned into a tree of organizations
//! whose leaves hold candidate solutions. Each iteration picks a source
//! solution by fitness roulette, picks a granularity level by effectiveness
//! roulette, resolves a target organization at that level, and spawns an
//! offspring of the source stepped toward the organization's aggregation
//! center (or a random point of its region). The worst solution is then
//! culled, holding the population at its initial size. Organizations whose
//! members all die are pruned; offspring that escape every region grow the
//! source's chain instead. Optional self-tuning feeds improvement rewards
//! back into the level effectiveness weights.

pub mod hierarchy;
pub mod selection;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::result::BestTracker;
use crate::rng::RngStream;
use crate::{Budget, Error, Problem, Result, RunResult};

use hierarchy::Hierarchy;
use selection::Target;
pub use selection::{OrgSelector, SolutionSelector};

/// Shape and movement parameters of the hierarchy.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HierarchyConfig {
    /// Number of granularity levels; the last level addresses individual
    /// solutions.
    pub level_count: usize,
    /// Fan-out per level. The first `level_count - 1` entries size the
    /// organization tree; the last entry is members per deepest
    /// organization. The product is the population size.
    pub children_per_level: Vec<usize>,
    /// Initial roulette weight of each level, coarsest first.
    pub initial_effectiveness: Vec<f64>,
    /// Probability of aiming at a random point of the target region instead
    /// of the cached center.
    pub random_update_threshold: f64,
    /// The move multiplier is uniform in [0, beta_move).
    pub beta_move: f64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            level_count: 4,
            children_per_level: vec![2, 4, 5, 5],
            initial_effectiveness: vec![5.0, 15.0, 30.0, 50.0],
            random_update_threshold: 0.1,
            beta_move: 2.0,
        }
    }
}

impl HierarchyConfig {
    pub fn population(&self) -> usize {
        self.children_per_level.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.level_count == 0 {
            return Err(Error::InvalidConfig(
                "level_count must be at least 1".into(),
            ));
        }
        if self.children_per_level.len() != self.level_count {
            return Err(Error::InvalidConfig(
                "children_per_level must have one entry per level".into(),
            ));
        }
        if self.children_per_level.iter().any(|&c| c == 0) {
            return Err(Error::InvalidConfig(
                "level fan-out must be positive".into(),
            ));
        }
        if self.initial_effectiveness.len() != self.level_count {
            return Err(Error::InvalidConfig(
                "initial_effectiveness must have one entry per level".into(),
            ));
        }
        if self
            .initial_effectiveness
            .iter()
            .any(|&e| !e.is_finite() || e <= 0.0)
        {
            return Err(Error::InvalidConfig(
                "effectiveness weights must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.random_update_threshold) {
            return Err(Error::InvalidConfig(
                "random_update_threshold must lie in [0, 1]".into(),
            ));
        }
        if !(self.beta_move > 0.0) || !self.beta_move.is_finite() {
            return Err(Error::InvalidConfig("beta_move must be positive".into()));
        }
        Ok(())
    }
}

/// How an organization aggregates its descendants into a single point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMetric {
    /// Fitness-weighted mean over all descendant solution positions.
    WeightedMeanOfSolutions,
    /// Position of the best descendant solution.
    MinCostSolution,
    /// Unweighted mean of sub-organization centers (member positions at the
    /// deepest level).
    MeanOfSubOrganizations,
    /// Fitness-weighted mean of sub-organization centers, weighted by their
    /// best descendant costs.
    WeightedMeanOfSubOrganizations,
    /// Geometric center of the organization's region.
    RegionCenter,
}

/// Exponential feedback from move outcomes into level effectiveness.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SelfTuningConfig {
    /// Smoothing factor of the exponential update.
    pub alpha: f64,
    /// Reward when a move improves the best cost seen so far.
    pub reward_improvement: f64,
    /// Reward when it does not.
    pub reward_stall: f64,
    /// Effectiveness never drops below this, so every level stays reachable.
    pub floor: f64,
}

impl Default for SelfTuningConfig {
    fn default() -> Self {
        SelfTuningConfig {
            alpha: 0.1,
            reward_improvement: 100.0,
            reward_stall: 1.0,
            floor: 1e-6,
        }
    }
}

impl SelfTuningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig("alpha must lie in [0, 1]".into()));
        }
        if self.reward_improvement <= 0.0 || self.reward_stall <= 0.0 || self.floor <= 0.0 {
            return Err(Error::InvalidConfig(
                "rewards and floor must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Named presets over the selector and self-tuning switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OhmVariant {
    /// Entailing-organization targets: every move aims at the solution's own
    /// chain.
    OhmPso,
    /// Best-other-organization targets.
    OhmIca,
    /// Entailing targets plus self-tuned level effectiveness.
    OhmPsoSt,
    /// Roulette over other organizations plus self-tuned effectiveness.
    OhmIcaSt,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OhmConfig {
    pub hierarchy: HierarchyConfig,
    pub solution_selector: SolutionSelector,
    pub org_selector: OrgSelector,
    pub center_metric: CenterMetric,
    /// `None` keeps the initial effectiveness weights fixed.
    pub self_tuning: Option<SelfTuningConfig>,
}

impl Default for OhmConfig {
    fn default() -> Self {
        OhmConfig::variant(OhmVariant::OhmPso)
    }
}

impl OhmConfig {
    pub fn variant(v: OhmVariant) -> Self {
        let base = OhmConfig {
            hierarchy: HierarchyConfig::default(),
            solution_selector: SolutionSelector::FitnessRws,
            org_selector: OrgSelector::EntailingOrg,
            center_metric: CenterMetric::WeightedMeanOfSolutions,
            self_tuning: None,
        };
        match v {
            OhmVariant::OhmPso => base,
            OhmVariant::OhmIca => OhmConfig {
                org_selector: OrgSelector::MinCostExcludingOrg,
                ..base
            },
            OhmVariant::OhmPsoSt => OhmConfig {
                self_tuning: Some(SelfTuningConfig::default()),
                ..base
            },
            OhmVariant::OhmIcaSt => OhmConfig {
                org_selector: OrgSelector::MinCostExcludingOrgRws,
                self_tuning: Some(SelfTuningConfig::default()),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hierarchy.validate()?;
        self.org_selector.validate()?;
        if let Some(st) = &self.self_tuning {
            st.validate()?;
        }
        Ok(())
    }
}

/// One iteration's bookkeeping, also the schema of the JSONL trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: u64,
    /// Index of the moved solution.
    pub solution: usize,
    /// Granularity level the move targeted, 1-based.
    pub level: usize,
    /// Target organization id, absent when the target was a solution.
    pub target_org: Option<usize>,
    /// Target solution index, absent when the target was an organization.
    pub target_solution: Option<usize>,
    /// True when an exclusion selector found no rival and fell back to the
    /// entailing organization.
    pub fallback: bool,
    /// True when the move aimed at a random point of the target region.
    pub random_update: bool,
    /// Move multiplier drawn for this iteration.
    pub step: f64,
    /// Euclidean distance actually travelled after clamping.
    pub distance: f64,
    /// Cost at the new position.
    pub cost: f64,
    /// Best cost seen so far, this move included.
    pub best_cost: f64,
}

/// Mutable search state: the hierarchy plus the live effectiveness weights.
pub struct OhmState {
    hierarchy: Hierarchy,
    effectiveness: Vec<f64>,
    iter: u64,
}

impl OhmState {
    /// Builds the tree and evaluates the initial population (one evaluation
    /// per member).
    pub fn init(
        problem: &Problem,
        budget: &mut Budget,
        cfg: &OhmConfig,
        rng: &mut RngStream,
        tracker: &mut BestTracker,
    ) -> Result<Self> {
        cfg.validate()?;
        let hierarchy = Hierarchy::init(
            problem,
            budget,
            &cfg.hierarchy,
            cfg.center_metric,
            rng,
            tracker,
        )?;
        Ok(OhmState {
            hierarchy,
            effectiveness: cfg.hierarchy.initial_effectiveness.clone(),
            iter: 0,
        })
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn effectiveness(&self) -> &[f64] {
        &self.effectiveness
    }

    /// Verifies the hierarchy structure and the effectiveness weights.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        self.hierarchy.check_invariants()?;
        if self.effectiveness.len() != self.hierarchy.level_count() {
            return Err("effectiveness length must match the level count".into());
        }
        if self
            .effectiveness
            .iter()
            .any(|&e| !e.is_finite() || e <= 0.0)
        {
            return Err("effectiveness weights must stay positive".into());
        }
        Ok(())
    }

    /// One move: select a source solution, a level, and a target; spawn an
    /// offspring of the source stepped toward the target; insert it and cull
    /// the worst solution so the population returns to capacity; then feed
    /// the outcome back into the effectiveness weights when self-tuning is
    /// on. Costs exactly one evaluation.
    pub fn iteration(
        &mut self,
        problem: &Problem,
        budget: &mut Budget,
        cfg: &OhmConfig,
        rng: &mut RngStream,
        tracker: &mut BestTracker,
    ) -> Result<IterationRecord> {
        let source = selection::select_solution(&self.hierarchy, cfg.solution_selector, rng)?;
        let level = selection::select_level(&self.effectiveness, rng)?;

        let (target, fallback) =
            match selection::select_target(&self.hierarchy, source, level, cfg.org_selector, rng) {
                Ok(t) => (t, false),
                Err(Error::NoCandidate) => {
                    log::debug!(
                    "no rival entity at level {level}; falling back to the entailing organization"
                );
                    let t = selection::select_target(
                        &self.hierarchy,
                        source,
                        level,
                        OrgSelector::EntailingOrg,
                        rng,
                    )?;
                    (t, true)
                }
                Err(e) => return Err(e),
            };

        let (center, region_org) = match target {
            Target::Org(o) => (self.hierarchy.center(o).to_vec(), o),
            Target::Solution(s) => (self.hierarchy.position(s).to_vec(), self.hierarchy.home(s)),
        };
        let random_update = rng.unit() < cfg.hierarchy.random_update_threshold;
        let aim = if random_update {
            self.hierarchy.region(region_org).sample(rng)
        } else {
            center
        };

        let step = rng.uniform(0.0, cfg.hierarchy.beta_move)?;
        let old = self.hierarchy.position(source).to_vec();
        let mut x = selection::move_point(&old, &aim, step);
        problem.clamp_in_place(&mut x);
        let cost = problem.evaluate(budget, &x)?;
        let improved = tracker.observe(&x, cost);
        let distance = old
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();

        let fallback_home = self.hierarchy.home(source);
        self.hierarchy.insert_solution(x, cost, fallback_home);
        let cap = self.hierarchy.capacity();
        self.hierarchy.enforce_capacity(cap);

        if let Some(st) = &cfg.self_tuning {
            let reward = if improved {
                st.reward_improvement
            } else {
                st.reward_stall
            };
            let e = &mut self.effectiveness[level - 1];
            *e = ((1.0 - st.alpha) * *e + st.alpha * reward).max(st.floor);
        }

        let record = IterationRecord {
            iter: self.iter,
            solution: source,
            level,
            target_org: match target {
                Target::Org(o) => Some(o),
                Target::Solution(_) => None,
            },
            target_solution: match target {
                Target::Solution(s) => Some(s),
                Target::Org(_) => None,
            },
            fallback,
            random_update,
            step,
            distance,
            cost,
            best_cost: tracker.cost,
        };
        self.iter += 1;
        Ok(record)
    }
}

fn ohm_run_impl(
    problem: &Problem,
    budget: &mut Budget,
    cfg: &OhmConfig,
    rng: &mut RngStream,
    mut trace: Option<&mut dyn Write>,
) -> Result<RunResult> {
    let mut tracker = BestTracker::new();
    let mut state = OhmState::init(problem, budget, cfg, rng, &mut tracker)?;
    tracker.snapshot();
    while !budget.is_exhausted() {
        let record = state.iteration(problem, budget, cfg, rng, &mut tracker)?;
        if let Some(w) = trace.as_deref_mut() {
            serde_json::to_writer(&mut *w, &record)?;
            writeln!(w)?;
        }
        tracker.snapshot();
    }
    Ok(tracker.into_result(budget.nfe_used()))
}

/// Runs the hierarchy search until the budget is spent.
pub fn ohm_run(
    problem: &Problem,
    budget: &mut Budget,
    cfg: &OhmConfig,
    rng: &mut RngStream,
) -> Result<RunResult> {
    ohm_run_impl(problem, budget, cfg, rng, None)
}

/// Same as [`ohm_run`], additionally writing one JSON line per iteration.
pub fn ohm_run_traced<W: Write>(
    problem: &Problem,
    budget: &mut Budget,
    cfg: &OhmConfig,
    rng: &mut RngStream,
    trace: &mut W,
) -> Result<RunResult> {
    ohm_run_impl(problem, budget, cfg, rng, Some(trace))
}
