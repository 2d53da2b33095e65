//! Particle swarm baseline with linearly interpolated inertia and a
//! per-coordinate velocity cap.

use serde::{Deserialize, Serialize};

use crate::result::BestTracker;
use crate::rng::RngStream;
use crate::{Budget, Error, Problem, Result, RunResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    /// Inertia at the first iteration; decays linearly to `inertia_end`.
    pub inertia_start: f64,
    pub inertia_end: f64,
    /// Velocity cap as a fraction of the box width per coordinate. The
    /// conventional tight setting 0.1/8 = 0.0125 is available by config.
    pub v_max_fraction: f64,
    /// Acceleration draws are uniform in `[0, phi_max)`.
    pub phi_max: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 40,
            inertia_start: 0.9,
            inertia_end: 0.7,
            v_max_fraction: 0.1,
            phi_max: 2.0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::InvalidConfig("swarm_size must be positive".into()));
        }
        if !(self.inertia_end > 0.0
            && self.inertia_end <= self.inertia_start
            && self.inertia_start < 2.0)
        {
            return Err(Error::InvalidConfig(
                "inertia must satisfy 0 < end <= start < 2".into(),
            ));
        }
        if !(self.v_max_fraction > 0.0 && self.v_max_fraction <= 1.0) {
            return Err(Error::InvalidConfig(
                "v_max_fraction must be in (0, 1]".into(),
            ));
        }
        if self.phi_max <= 0.0 {
            return Err(Error::InvalidConfig("phi_max must be positive".into()));
        }
        Ok(())
    }
}

/// One-coordinate velocity update. The acceleration coefficients are passed
/// in so the rule itself is deterministic.
pub(crate) fn velocity_update(
    v: f64,
    x: f64,
    personal: f64,
    global: f64,
    inertia: f64,
    phi1: f64,
    phi2: f64,
) -> f64 {
    inertia * v + phi1 * (personal - x) + phi2 * (global - x)
}

#[derive(Debug, Clone)]
struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    cost: f64,
    best_position: Vec<f64>,
    best_cost: f64,
}

/// Swarm state exposed for stepwise tests.
#[derive(Debug, Clone)]
pub struct PsoState {
    particles: Vec<Particle>,
    v_max: Vec<f64>,
    global_best: Vec<f64>,
    global_best_cost: f64,
}

impl PsoState {
    /// Samples and evaluates the initial swarm. Consumes `swarm_size`
    /// evaluations (or errors if the budget cannot cover them).
    pub fn init(
        problem: &Problem,
        budget: &mut Budget,
        cfg: &PsoConfig,
        rng: &mut RngStream,
    ) -> Result<Self> {
        cfg.validate()?;
        let dim = problem.dim();
        let v_max: Vec<f64> = (0..dim)
            .map(|d| cfg.v_max_fraction * (problem.upper()[d] - problem.lower()[d]))
            .collect();
        let mut particles = Vec::with_capacity(cfg.swarm_size);
        let mut global_best = Vec::new();
        let mut global_best_cost = f64::INFINITY;
        for _ in 0..cfg.swarm_size {
            let position = rng.point_in_box(problem.lower(), problem.upper());
            let cost = problem.evaluate(budget, &position)?;
            if cost < global_best_cost {
                global_best_cost = cost;
                global_best = position.clone();
            }
            particles.push(Particle {
                velocity: vec![0.0; dim],
                best_position: position.clone(),
                best_cost: cost,
                position,
                cost,
            });
        }
        Ok(PsoState {
            particles,
            v_max,
            global_best,
            global_best_cost,
        })
    }

    pub fn global_best(&self) -> (&[f64], f64) {
        (&self.global_best, self.global_best_cost)
    }

    /// Largest velocity magnitude per coordinate across the swarm, for cap
    /// checks.
    pub fn max_abs_velocity(&self) -> Vec<f64> {
        let dim = self.v_max.len();
        let mut m = vec![0.0f64; dim];
        for p in &self.particles {
            for d in 0..dim {
                m[d] = m[d].max(p.velocity[d].abs());
            }
        }
        m
    }

    pub fn v_max(&self) -> &[f64] {
        &self.v_max
    }

    /// Advances every particle once with the given inertia. Stops early
    /// (returning false) when the budget runs dry mid-sweep; untouched
    /// particles keep their state.
    pub fn step(
        &mut self,
        problem: &Problem,
        budget: &mut Budget,
        inertia: f64,
        cfg: &PsoConfig,
        rng: &mut RngStream,
        tracker: &mut BestTracker,
    ) -> Result<bool> {
        let dim = problem.dim();
        for i in 0..self.particles.len() {
            if budget.is_exhausted() {
                return Ok(false);
            }
            let p = &mut self.particles[i];
            for d in 0..dim {
                let phi1 = rng.uniform(0.0, cfg.phi_max)?;
                let phi2 = rng.uniform(0.0, cfg.phi_max)?;
                let v = velocity_update(
                    p.velocity[d],
                    p.position[d],
                    p.best_position[d],
                    self.global_best[d],
                    inertia,
                    phi1,
                    phi2,
                );
                p.velocity[d] = v.clamp(-self.v_max[d], self.v_max[d]);
                p.position[d] += p.velocity[d];
            }
            problem.clamp_in_place(&mut p.position);
            p.cost = problem.evaluate(budget, &p.position)?;
            if p.cost < p.best_cost {
                p.best_cost = p.cost;
                p.best_position = p.position.clone();
            }
            if p.cost < self.global_best_cost {
                self.global_best_cost = p.cost;
                self.global_best = p.position.clone();
            }
            tracker.observe(&p.position, p.cost);
        }
        Ok(true)
    }
}

/// Runs the swarm until the budget is spent.
pub fn pso_run(
    problem: &Problem,
    budget: &mut Budget,
    cfg: &PsoConfig,
    rng: &mut RngStream,
) -> Result<RunResult> {
    let mut tracker = BestTracker::new();
    let mut state = PsoState::init(problem, budget, cfg, rng)?;
    tracker.observe(&state.global_best, state.global_best_cost);
    tracker.snapshot();

    // Inertia is interpolated across the iterations the budget can fund.
    let per_iter = cfg.swarm_size as u64;
    let total_iters = (budget.remaining() + per_iter - 1) / per_iter.max(1);
    let mut k = 0u64;
    while !budget.is_exhausted() {
        let t = if total_iters > 1 {
            k as f64 / (total_iters - 1) as f64
        } else {
            0.0
        };
        let inertia = cfg.inertia_start + (cfg.inertia_end - cfg.inertia_start) * t;
        state.step(problem, budget, inertia, cfg, rng, &mut tracker)?;
        tracker.snapshot();
        k += 1;
    }
    Ok(tracker.into_result(budget.nfe_used()))
}
