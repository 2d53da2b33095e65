//! Imperialist competitive baseline.
//!
//! Countries split into empires led by the lowest-cost imperialists.
//! Colonies drift toward their imperialist, occasionally revolt to a fresh
//! uniform position, swap roles with an imperialist they undercut, and the
//! weakest empire bleeds colonies to a roulette-selected rival until it
//! collapses.

use serde::{Deserialize, Serialize};

use crate::ohm::selection::roulette;
use crate::result::BestTracker;
use crate::rng::RngStream;
use crate::{Budget, Error, Problem, Result, RunResult};

/// Weight of the mean colony cost in an empire's total power.
const COLONY_COST_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IcaConfig {
    pub n_countries: usize,
    pub n_imperialists: usize,
    /// Assimilation step scale; the move multiplier is uniform in [0, beta).
    pub beta: f64,
    /// Per-colony probability of revolting to a uniform position each
    /// iteration.
    pub revolution_rate: f64,
}

impl Default for IcaConfig {
    fn default() -> Self {
        IcaConfig {
            n_countries: 60,
            n_imperialists: 10,
            beta: 2.0,
            revolution_rate: 0.1,
        }
    }
}

impl IcaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_imperialists == 0 || self.n_imperialists >= self.n_countries {
            return Err(Error::InvalidConfig(
                "need 0 < n_imperialists < n_countries".into(),
            ));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidConfig("beta must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.revolution_rate) {
            return Err(Error::InvalidConfig(
                "revolution_rate must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Country {
    position: Vec<f64>,
    cost: f64,
}

#[derive(Debug, Clone)]
struct Empire {
    imperialist: Country,
    colonies: Vec<Country>,
}

impl Empire {
    /// Total power; lower is stronger.
    fn total_cost(&self) -> f64 {
        if self.colonies.is_empty() {
            self.imperialist.cost
        } else {
            let mean: f64 =
                self.colonies.iter().map(|c| c.cost).sum::<f64>() / self.colonies.len() as f64;
            self.imperialist.cost + COLONY_COST_WEIGHT * mean
        }
    }
}

/// Pure assimilation rule: step of length `u` along the line to the target.
pub(crate) fn assimilate_point(colony: &[f64], imperialist: &[f64], u: f64) -> Vec<f64> {
    colony
        .iter()
        .zip(imperialist)
        .map(|(&c, &i)| c + u * (i - c))
        .collect()
}

/// Moves a colony toward an imperialist with a fresh `u ~ U(0, beta)` and
/// clamps the result to the box. A colony already at the imperialist stays
/// put.
pub fn ica_assimilate(
    problem: &Problem,
    colony: &[f64],
    imperialist: &[f64],
    beta: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if colony.len() != problem.dim() || imperialist.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: colony.len(),
        });
    }
    let u = rng.uniform(0.0, beta)?;
    let mut x = assimilate_point(colony, imperialist, u);
    problem.clamp_in_place(&mut x);
    Ok(x)
}

/// Largest-remainder apportionment of `total` seats by non-negative weight.
/// Zero total weight splits as evenly as the remainder rule allows.
pub(crate) fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * total as f64).collect()
    } else {
        vec![total as f64 / n as f64; n]
    };
    let mut seats: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = seats.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in 0..(total - assigned) {
        seats[order[i % n]] += 1;
    }
    seats
}

/// Empire system state, exposed so the phases can be driven and inspected
/// one at a time.
#[derive(Debug, Clone)]
pub struct IcaState {
    empires: Vec<Empire>,
}

impl IcaState {
    /// Draws the initial countries, crowns the best as imperialists, and
    /// apportions colonies by imperialist fitness.
    pub fn init(
        problem: &Problem,
        budget: &mut Budget,
        cfg: &IcaConfig,
        rng: &mut RngStream,
        tracker: &mut BestTracker,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut countries = Vec::with_capacity(cfg.n_countries);
        for _ in 0..cfg.n_countries {
            let position = rng.point_in_box(problem.lower(), problem.upper());
            let cost = problem.evaluate(budget, &position)?;
            tracker.observe(&position, cost);
            countries.push(Country { position, cost });
        }
        countries.sort_by(|a, b| a.cost.partial_cmp(&b.cost).unwrap());
        let colonies: Vec<Country> = countries.split_off(cfg.n_imperialists);
        let imperialists = countries;

        let worst = imperialists
            .iter()
            .map(|c| c.cost)
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = imperialists
            .iter()
            .map(|c| (worst - c.cost).max(0.0) + f64::EPSILON)
            .collect();
        let counts = apportion(&weights, colonies.len());

        let mut empires: Vec<Empire> = imperialists
            .into_iter()
            .map(|imperialist| Empire {
                imperialist,
                colonies: Vec::new(),
            })
            .collect();
        let mut pool = colonies.into_iter();
        for (e, &k) in empires.iter_mut().zip(&counts) {
            for _ in 0..k {
                e.colonies
                    .push(pool.next().expect("apportion sums to pool size"));
            }
        }
        Ok(IcaState { empires })
    }

    pub fn n_empires(&self) -> usize {
        self.empires.len()
    }

    /// Countries across all empires, imperialists included.
    pub fn n_countries(&self) -> usize {
        self.empires.iter().map(|e| 1 + e.colonies.len()).sum()
    }

    /// True when every imperialist undercuts all of its colonies.
    pub fn imperialists_lead(&self) -> bool {
        self.empires
            .iter()
            .all(|e| e.colonies.iter().all(|c| e.imperialist.cost <= c.cost))
    }

    /// Assimilation sweep. Returns false when the budget ran out mid-sweep.
    pub fn assimilate(
        &mut self,
        problem: &Problem,
        budget: &mut Budget,
        cfg: &IcaConfig,
        rng: &mut RngStream,
        tracker: &mut BestTracker,
    ) -> Result<bool> {
        for e in &mut self.empires {
            for c in &mut e.colonies {
                if budget.is_exhausted() {
                    return Ok(false);
                }
                let u = rng.uniform(0.0, cfg.beta)?;
                let mut x = assimilate_point(&c.position, &e.imperialist.position, u);
                problem.clamp_in_place(&mut x);
                let cost = problem.evaluate(budget, &x)?;
                c.position = x;
                c.cost = cost;
                tracker.observe(&c.position, cost);
            }
        }
        Ok(true)
    }

    /// Revolution sweep: each colony independently teleports with
    /// probability `revolution_rate`.
    pub fn revolve(
        &mut self,
        problem: &Problem,
        budget: &mut Budget,
        cfg: &IcaConfig,
        rng: &mut RngStream,
        tracker: &mut BestTracker,
    ) -> Result<bool> {
        for e in &mut self.empires {
            for c in &mut e.colonies {
                if rng.unit() >= cfg.revolution_rate {
                    continue;
                }
                if budget.is_exhausted() {
                    return Ok(false);
                }
                let x = rng.point_in_box(problem.lower(), problem.upper());
                let cost = problem.evaluate(budget, &x)?;
                c.position = x;
                c.cost = cost;
                tracker.observe(&c.position, cost);
            }
        }
        Ok(true)
    }

    /// Swaps each imperialist with its best colony when the colony leads.
    pub fn exchange(&mut self) {
        for e in &mut self.empires {
            let best = e
                .colonies
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.cost.partial_cmp(&b.1.cost).unwrap())
                .map(|(i, _)| i);
            if let Some(i) = best {
                if e.colonies[i].cost < e.imperialist.cost {
                    std::mem::swap(&mut e.colonies[i], &mut e.imperialist);
                }
            }
        }
    }

    /// The weakest empire's worst colony defects to a roulette-selected
    /// rival. No-op with a single empire.
    pub fn compete(&mut self, rng: &mut RngStream) {
        if self.empires.len() < 2 {
            return;
        }
        let costs: Vec<f64> = self.empires.iter().map(Empire::total_cost).collect();
        let weakest = costs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .expect("at least two empires");
        if self.empires[weakest].colonies.is_empty() {
            return;
        }
        let worst_colony = self.empires[weakest]
            .colonies
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cost.partial_cmp(&b.1.cost).unwrap())
            .map(|(i, _)| i)
            .expect("non-empty checked above");
        let colony = self.empires[weakest].colonies.swap_remove(worst_colony);

        let max_cost = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = costs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == weakest {
                    0.0
                } else {
                    (max_cost - c).max(0.0) + f64::EPSILON
                }
            })
            .collect();
        let winner = roulette(&weights, rng).expect("positive weight exists");
        self.empires[winner].colonies.push(colony);
    }

    /// Collapses empires left without colonies; their imperialists join a
    /// roulette-selected survivor as colonies. The strongest empire always
    /// survives.
    pub fn eliminate(&mut self, rng: &mut RngStream) {
        while self.empires.len() > 1 {
            let empty = self.empires.iter().position(|e| e.colonies.is_empty());
            let Some(idx) = empty else { break };
            let collapsed = self.empires.remove(idx);
            let costs: Vec<f64> = self.empires.iter().map(Empire::total_cost).collect();
            let max_cost = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = costs
                .iter()
                .map(|&c| (max_cost - c).max(0.0) + f64::EPSILON)
                .collect();
            let winner = roulette(&weights, rng).expect("weights are positive");
            self.empires[winner].colonies.push(collapsed.imperialist);
        }
    }
}

/// Runs the empire system until the budget is spent.
pub fn ica_run(
    problem: &Problem,
    budget: &mut Budget,
    cfg: &IcaConfig,
    rng: &mut RngStream,
) -> Result<RunResult> {
    let mut tracker = BestTracker::new();
    let mut state = IcaState::init(problem, budget, cfg, rng, &mut tracker)?;
    tracker.snapshot();
    while !budget.is_exhausted() {
        let more = state.assimilate(problem, budget, cfg, rng, &mut tracker)?
            && state.revolve(problem, budget, cfg, rng, &mut tracker)?;
        state.exchange();
        state.compete(rng);
        state.eliminate(rng);
        tracker.snapshot();
        if !more {
            break;
        }
    }
    Ok(tracker.into_result(budget.nfe_used()))
}
