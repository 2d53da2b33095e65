//! Adam descent with periodic re-initialization.
//!
//! The outer loop runs rounds of `gd_iters_per_round` Adam steps. Every
//! `reinit_every` rounds the current point is re-seeded, either uniformly at
//! random (multi-start descent) or by handing a slice of the remaining
//! budget to a population optimizer and descending from its best point. One
//! gradient evaluation costs one budget unit, as does the cost evaluation at
//! each new point.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ica::{ica_run, IcaConfig};
use crate::ohm::{ohm_run, OhmConfig};
use crate::pso::{pso_run, PsoConfig};
use crate::result::BestTracker;
use crate::rng::RngStream;
use crate::{Budget, Error, Problem, Result, RunResult};

type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A problem with a gradient oracle: analytic when supplied, central finite
/// differences otherwise. Either way one gradient call charges one budget
/// unit.
#[derive(Clone)]
pub struct GradProblem {
    problem: Problem,
    grad: Option<Arc<GradFn>>,
}

impl GradProblem {
    /// Fall back to central finite differences over the raw objective.
    pub fn from_problem(problem: Problem) -> Self {
        GradProblem {
            problem,
            grad: None,
        }
    }

    pub fn with_gradient(problem: Problem, grad: Arc<GradFn>) -> Self {
        GradProblem {
            problem,
            grad: Some(grad),
        }
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// Gradient at `x`, charging exactly one evaluation.
    pub fn gradient(&self, budget: &mut Budget, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.problem.dim(),
                got: x.len(),
            });
        }
        budget.charge()?;
        match &self.grad {
            Some(g) => Ok(g(x)),
            None => Ok(self.central_differences(x)),
        }
    }

    fn central_differences(&self, x: &[f64]) -> Vec<f64> {
        let mut g = Vec::with_capacity(x.len());
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            let h = 1e-6 * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let hi = self.problem.raw_cost(&probe);
            probe[i] = x[i] - h;
            let lo = self.problem.raw_cost(&probe);
            probe[i] = x[i];
            g.push((hi - lo) / (2.0 * h));
        }
        g
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub momentum1: f64,
    pub momentum2: f64,
    pub epsilon: f64,
    /// Adam steps per round.
    pub gd_iters_per_round: usize,
    /// Rounds between re-seeds; the first round always seeds.
    pub reinit_every: usize,
    pub max_rounds: usize,
    /// Round-to-round convergence threshold on the parameter change
    /// `sum(abs(x_round - x_prev_round))`; only compared within one seed
    /// segment.
    pub convergence_gamma: f64,
    /// Step sign: false descends, true ascends.
    pub ascend: bool,
    /// Gradient components above this magnitude are zeroed as corrupted.
    pub grad_clip_threshold: f64,
    /// Fraction of the remaining budget granted to the initializer at each
    /// re-seed.
    pub init_budget_fraction: f64,
    /// Smooth uniform re-seeds with one momentum-style warm-up gradient
    /// step before descending.
    pub nesterov_warmup: bool,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.02,
            momentum1: 0.9,
            momentum2: 0.8,
            epsilon: 1e-8,
            gd_iters_per_round: 5,
            reinit_every: 5,
            max_rounds: 10_000,
            convergence_gamma: 1e-10,
            ascend: false,
            grad_clip_threshold: 1e8,
            init_budget_fraction: 0.1,
            nesterov_warmup: false,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.momentum1) || !(0.0..1.0).contains(&self.momentum2) {
            return Err(Error::InvalidConfig("momenta must lie in [0, 1)".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig("epsilon must be non-negative".into()));
        }
        if self.reinit_every == 0 || self.max_rounds == 0 {
            return Err(Error::InvalidConfig(
                "reinit_every and max_rounds must be positive".into(),
            ));
        }
        if !(self.convergence_gamma >= 0.0) {
            return Err(Error::InvalidConfig(
                "convergence_gamma must be non-negative".into(),
            ));
        }
        if !(self.grad_clip_threshold > 0.0) {
            return Err(Error::InvalidConfig(
                "grad_clip_threshold must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.init_budget_fraction) {
            return Err(Error::InvalidConfig(
                "init_budget_fraction must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Zeroes non-finite components and components beyond `threshold` in
/// magnitude. Returns the cleaned gradient and how many components were
/// zeroed.
pub fn sanitize_gradient(grad: &[f64], threshold: f64) -> (Vec<f64>, usize) {
    let mut zeroed = 0;
    let cleaned = grad
        .iter()
        .map(|&g| {
            if g.is_finite() && g.abs() <= threshold {
                g
            } else {
                zeroed += 1;
                0.0
            }
        })
        .collect();
    (cleaned, zeroed)
}

/// One in-place Adam update with bias correction. `t` is the 1-based step
/// index within the current seed segment.
pub fn adam_step(
    params: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    cfg: &AdamConfig,
) -> Result<()> {
    if grad.len() != params.len() || m.len() != params.len() || v.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            got: grad.len(),
        });
    }
    if t == 0 {
        return Err(Error::InvalidConfig("step index starts at 1".into()));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient);
    }
    let b1 = cfg.momentum1;
    let b2 = cfg.momentum2;
    let c1 = 1.0 - b1.powi(t as i32);
    let c2 = 1.0 - b2.powi(t as i32);
    let sign = if cfg.ascend { 1.0 } else { -1.0 };
    for i in 0..params.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] += sign * cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

/// Where re-seed points come from.
#[derive(Debug, Clone)]
pub enum Initializer {
    /// Uniform random point: plain multi-start descent.
    None,
    Pso(PsoConfig),
    Ica(IcaConfig),
    Ohm(OhmConfig),
}

impl Initializer {
    fn label(&self) -> &'static str {
        match self {
            Initializer::None => "uniform",
            Initializer::Pso(_) => "pso",
            Initializer::Ica(_) => "ica",
            Initializer::Ohm(_) => "ohm",
        }
    }

    /// Smallest budget the population initializer needs to start up.
    fn min_budget(&self) -> u64 {
        match self {
            Initializer::None => 0,
            Initializer::Pso(cfg) => cfg.swarm_size as u64,
            Initializer::Ica(cfg) => cfg.n_countries as u64,
            Initializer::Ohm(cfg) => cfg.hierarchy.population() as u64,
        }
    }
}

/// Outcome of a hybrid run: the usual result plus whether the round loop
/// stopped by parameter convergence (rather than budget or the round cap).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HybridResult {
    pub result: RunResult,
    pub converged: bool,
    pub rounds: u64,
}

/// One line of the round-level JSONL trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    /// Initializer behind the segment this round descended in.
    pub seed_source: String,
    /// Cost at the current point after the round's steps.
    pub cost: f64,
    pub best_cost: f64,
}

struct SegmentState {
    x: Vec<f64>,
    cost: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

fn reseed(
    gp: &GradProblem,
    budget: &mut Budget,
    cfg: &AdamConfig,
    initializer: &Initializer,
    rng: &mut RngStream,
    tracker: &mut BestTracker,
) -> Result<Option<SegmentState>> {
    let problem = gp.problem();
    let dim = problem.dim();

    let slice_size = (budget.remaining() as f64 * cfg.init_budget_fraction).floor() as u64;
    let use_meta = !matches!(initializer, Initializer::None)
        && slice_size >= initializer.min_budget()
        && initializer.min_budget() > 0;

    let (x, cost) = if use_meta {
        let mut slice = budget.reserve(slice_size);
        let run = match initializer {
            Initializer::Pso(c) => pso_run(problem, &mut slice, c, rng)?,
            Initializer::Ica(c) => ica_run(problem, &mut slice, c, rng)?,
            Initializer::Ohm(c) => ohm_run(problem, &mut slice, c, rng)?,
            Initializer::None => unreachable!("guarded by use_meta"),
        };
        budget.absorb(&slice);
        (run.best_position, run.best_cost)
    } else {
        if budget.is_exhausted() {
            return Ok(None);
        }
        let mut x = rng.point_in_box(problem.lower(), problem.upper());
        if cfg.nesterov_warmup && budget.remaining() >= 2 {
            let g = gp.gradient(budget, &x)?;
            let (g, _) = sanitize_gradient(&g, cfg.grad_clip_threshold);
            let sign = if cfg.ascend { 1.0 } else { -1.0 };
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi += sign * cfg.learning_rate * gi;
            }
            problem.clamp_in_place(&mut x);
        }
        let cost = problem.evaluate(budget, &x)?;
        (x, cost)
    };

    tracker.observe(&x, cost);
    Ok(Some(SegmentState {
        cost,
        m: vec![0.0; dim],
        v: vec![0.0; dim],
        t: 0,
        x,
    }))
}

fn hybrid_run_impl(
    gp: &GradProblem,
    budget: &mut Budget,
    cfg: &AdamConfig,
    initializer: &Initializer,
    rng: &mut RngStream,
    mut trace: Option<&mut dyn Write>,
) -> Result<HybridResult> {
    cfg.validate()?;
    let problem = gp.problem();
    let mut tracker = BestTracker::new();
    let mut converged = false;
    let mut round: u64 = 0;
    let mut segment: Option<SegmentState> = None;
    let mut prev_round_end: Option<Vec<f64>> = None;

    'outer: while (round as usize) < cfg.max_rounds && !budget.is_exhausted() {
        if round as usize % cfg.reinit_every == 0 || segment.is_none() {
            match reseed(gp, budget, cfg, initializer, rng, &mut tracker)? {
                Some(s) => segment = Some(s),
                None => break 'outer,
            }
            prev_round_end = None;
            tracker.snapshot();
        }
        let seg = segment.as_mut().expect("seeded above");

        for _ in 0..cfg.gd_iters_per_round {
            match budget.remaining() {
                0 => break 'outer,
                // Not enough left for a gradient plus an evaluation: spend
                // the last unit re-scoring the current point so the budget
                // closes exactly.
                1 => {
                    let c = problem.evaluate(budget, &seg.x)?;
                    tracker.observe(&seg.x, c);
                    break 'outer;
                }
                _ => {}
            }
            let g = gp.gradient(budget, &seg.x)?;
            let (g, zeroed) = sanitize_gradient(&g, cfg.grad_clip_threshold);
            if zeroed > 0 {
                log::debug!("zeroed {zeroed} corrupted gradient components");
            }
            seg.t += 1;
            adam_step(&mut seg.x, &g, &mut seg.m, &mut seg.v, seg.t, cfg)?;
            problem.clamp_in_place(&mut seg.x);
            seg.cost = problem.evaluate(budget, &seg.x)?;
            tracker.observe(&seg.x, seg.cost);
        }

        tracker.snapshot();
        if let Some(w) = trace.as_deref_mut() {
            let record = RoundRecord {
                round,
                seed_source: initializer.label().into(),
                cost: seg.cost,
                best_cost: tracker.cost,
            };
            serde_json::to_writer(&mut *w, &record)?;
            writeln!(w)?;
        }

        if let Some(prev) = &prev_round_end {
            let change: f64 = seg.x.iter().zip(prev).map(|(a, b)| (a - b).abs()).sum();
            if change < cfg.convergence_gamma {
                converged = true;
                round += 1;
                break 'outer;
            }
        }
        prev_round_end = Some(seg.x.clone());
        round += 1;
    }

    tracker.snapshot();
    Ok(HybridResult {
        result: tracker.into_result(budget.nfe_used()),
        converged,
        rounds: round,
    })
}

/// Adam descent re-seeded by the configured initializer. With
/// `Initializer::None` this is plain multi-start descent.
pub fn ohm_gd_run(
    gp: &GradProblem,
    budget: &mut Budget,
    cfg: &AdamConfig,
    initializer: &Initializer,
    rng: &mut RngStream,
) -> Result<HybridResult> {
    hybrid_run_impl(gp, budget, cfg, initializer, rng, None)
}

/// Same as [`ohm_gd_run`], writing one JSON line per round.
pub fn ohm_gd_run_traced<W: Write>(
    gp: &GradProblem,
    budget: &mut Budget,
    cfg: &AdamConfig,
    initializer: &Initializer,
    rng: &mut RngStream,
    trace: &mut W,
) -> Result<HybridResult> {
    hybrid_run_impl(gp, budget, cfg, initializer, rng, Some(trace))
}

/// Descent re-seeded by a particle swarm every `n_g` rounds.
pub fn gpso_run(
    gp: &GradProblem,
    budget: &mut Budget,
    cfg: &AdamConfig,
    pso_cfg: &PsoConfig,
    n_g: usize,
    rng: &mut RngStream,
) -> Result<HybridResult> {
    if n_g == 0 {
        return Err(Error::InvalidConfig("n_g must be positive".into()));
    }
    let cfg = AdamConfig {
        reinit_every: n_g,
        ..cfg.clone()
    };
    ohm_gd_run(gp, budget, &cfg, &Initializer::Pso(pso_cfg.clone()), rng)
}
