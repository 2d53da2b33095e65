//! Roulette-wheel selection and target addressing over the hierarchy.

use serde::{Deserialize, Serialize};

use crate::ohm::hierarchy::Hierarchy;
use crate::rng::RngStream;
use crate::{Error, Result};

/// Converts raw costs (lower is better) into positive selection weights:
/// the gap to the worst finite cost plus a magnitude-scaled epsilon so the
/// worst entry keeps a sliver of probability. Non-finite costs get the bare
/// epsilon; an all-non-finite population degrades to uniform weights.
pub fn fitness_weights(costs: &[f64]) -> Vec<f64> {
    let worst = costs
        .iter()
        .cloned()
        .filter(|c| c.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !worst.is_finite() {
        return vec![1.0; costs.len()];
    }
    let eps = 1e-12 * worst.abs().max(1.0);
    costs
        .iter()
        .map(|&c| {
            if c.is_finite() {
                (worst - c).max(0.0) + eps
            } else {
                eps
            }
        })
        .collect()
}

/// Draws an index with probability proportional to its weight. Weights must
/// be non-negative with a positive finite total.
pub fn roulette(weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    debug_assert!(weights.iter().all(|&w| w >= 0.0), "negative weight");
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || !total.is_finite() || total <= 0.0 {
        return Err(Error::EmptyPopulation);
    }
    let r = rng.uniform(0.0, total)?;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return Ok(i);
        }
    }
    // Float roundoff can leave r at the top of the wheel; take the last
    // entry with any weight.
    Ok(weights
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("total is positive"))
}

/// How the solution to update is drawn from the population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionSelector {
    /// Roulette weighted by the gap to the worst cost: elites move most.
    FitnessRws,
    /// Uniform roulette: every solution is equally likely.
    UniformRws,
}

/// Roulette over the whole population.
pub fn select_solution(
    h: &Hierarchy,
    selector: SolutionSelector,
    rng: &mut RngStream,
) -> Result<usize> {
    match selector {
        SolutionSelector::FitnessRws => roulette(&fitness_weights(&h.solution_costs()), rng),
        SolutionSelector::UniformRws => roulette(&vec![1.0; h.n_solutions()], rng),
    }
}

/// Roulette over granularity levels by effectiveness. Returns a 1-based
/// level; the highest level addresses individual solutions.
pub fn select_level(effectiveness: &[f64], rng: &mut RngStream) -> Result<usize> {
    Ok(roulette(effectiveness, rng)? + 1)
}

fn half() -> f64 {
    0.5
}

/// How the target organization is chosen once a level is fixed. At the
/// deepest granularity the candidates are the solutions themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrgSelector {
    /// The entity holding the best solution at the level.
    MinCostSolution,
    /// Fitness roulette over per-entity best costs.
    MinCostSolutionRws,
    /// The entity whose members average cheapest.
    MeanOfSubOrgCosts,
    /// Fitness roulette over per-entity mean costs.
    MeanOfSubOrgCostsRws,
    /// The organization the moving solution already belongs to.
    EntailingOrg,
    /// The best organization at the level, never the solution's own.
    MinCostExcludingOrg,
    /// Fitness roulette over the level, never the solution's own.
    MinCostExcludingOrgRws,
    /// Coin flip between the entailing and best-other behaviors.
    EntailingOrgExcludingOrg {
        #[serde(default = "half")]
        entailing_probability: f64,
    },
    /// Coin flip between the entailing and roulette-other behaviors.
    EntailingOrgExcludingOrgRws {
        #[serde(default = "half")]
        entailing_probability: f64,
    },
}

impl OrgSelector {
    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            OrgSelector::EntailingOrgExcludingOrg {
                entailing_probability: p,
            }
            | OrgSelector::EntailingOrgExcludingOrgRws {
                entailing_probability: p,
            } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidConfig(
                        "entailing_probability must lie in [0, 1]".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// What a move aims at. At the deepest granularity individual solutions act
/// as singleton organizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Org(usize),
    Solution(usize),
}

/// Picks the target entity for `source` at `level`. Exclusion selectors fail
/// with `NoCandidate` when the level offers nothing besides the source's own
/// entity; callers fall back to the entailing organization.
pub fn select_target(
    h: &Hierarchy,
    source: usize,
    level: usize,
    selector: OrgSelector,
    rng: &mut RngStream,
) -> Result<Target> {
    // The mixed selectors resolve to one of their two behaviors first, so
    // every downstream arm sees a plain selector.
    let selector = match selector {
        OrgSelector::EntailingOrgExcludingOrg {
            entailing_probability,
        } => {
            if rng.unit() < entailing_probability {
                OrgSelector::EntailingOrg
            } else {
                OrgSelector::MinCostExcludingOrg
            }
        }
        OrgSelector::EntailingOrgExcludingOrgRws {
            entailing_probability,
        } => {
            if rng.unit() < entailing_probability {
                OrgSelector::EntailingOrg
            } else {
                OrgSelector::MinCostExcludingOrgRws
            }
        }
        other => other,
    };

    // At the deepest granularity the entities are the solutions themselves;
    // above it they are the live organizations of the level. `cost` ranks an
    // entity by its best member, `mean` by the average member.
    let solutions = level == h.level_count();
    let (ids, own) = if solutions {
        ((0..h.n_solutions()).collect::<Vec<_>>(), source)
    } else {
        (h.live_orgs_at(level), h.entailing_org(source, level))
    };
    let cost = |e: usize| if solutions { h.cost(e) } else { h.best_cost(e) };
    let mean = |e: usize| if solutions { h.cost(e) } else { h.mean_cost(e) };
    let wrap = |e: usize| {
        if solutions {
            Target::Solution(e)
        } else {
            Target::Org(e)
        }
    };

    let argmin = |ids: &[usize], key: &dyn Fn(usize) -> f64| {
        ids.iter()
            .copied()
            .min_by(|&a, &b| key(a).partial_cmp(&key(b)).expect("costs are never NaN"))
    };
    let wheel = |ids: &[usize], key: &dyn Fn(usize) -> f64, rng: &mut RngStream| {
        let weights = fitness_weights(&ids.iter().map(|&e| key(e)).collect::<Vec<_>>());
        roulette(&weights, rng).map(|k| ids[k])
    };

    match selector {
        OrgSelector::EntailingOrg => Ok(wrap(own)),
        OrgSelector::MinCostSolution => argmin(&ids, &cost).map(wrap).ok_or(Error::EmptyPopulation),
        OrgSelector::MinCostSolutionRws => wheel(&ids, &cost, rng).map(wrap),
        OrgSelector::MeanOfSubOrgCosts => {
            argmin(&ids, &mean).map(wrap).ok_or(Error::EmptyPopulation)
        }
        OrgSelector::MeanOfSubOrgCostsRws => wheel(&ids, &mean, rng).map(wrap),
        OrgSelector::MinCostExcludingOrg => {
            let rivals: Vec<usize> = ids.into_iter().filter(|&e| e != own).collect();
            argmin(&rivals, &cost).map(wrap).ok_or(Error::NoCandidate)
        }
        OrgSelector::MinCostExcludingOrgRws => {
            let rivals: Vec<usize> = ids.into_iter().filter(|&e| e != own).collect();
            if rivals.is_empty() {
                return Err(Error::NoCandidate);
            }
            wheel(&rivals, &cost, rng).map(wrap)
        }
        OrgSelector::EntailingOrgExcludingOrg { .. }
        | OrgSelector::EntailingOrgExcludingOrgRws { .. } => {
            unreachable!("mixed selectors resolve before dispatch")
        }
    }
}

/// Step of length `u` along the line from `x` to `target`.
pub(crate) fn move_point(x: &[f64], target: &[f64], u: f64) -> Vec<f64> {
    x.iter()
        .zip(target)
        .map(|(&a, &t)| a + u * (t - a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_benchmark, BenchmarkId};
    use crate::ohm::{CenterMetric, HierarchyConfig};
    use crate::result::BestTracker;
    use crate::Budget;

    fn default_hierarchy(seed: u64) -> Hierarchy {
        let p = make_benchmark(BenchmarkId::parse("Sphere").unwrap(), 3, 0).unwrap();
        let mut budget = Budget::new(1000);
        let mut rng = RngStream::new(seed);
        let mut tracker = BestTracker::new();
        Hierarchy::init(
            &p,
            &mut budget,
            &HierarchyConfig::default(),
            CenterMetric::WeightedMeanOfSolutions,
            &mut rng,
            &mut tracker,
        )
        .unwrap()
    }

    // Hand-checked: worst finite cost 4, eps = 1e-12 * 4.
    #[test]
    fn fitness_weights_are_worst_gaps_plus_epsilon() {
        let w = fitness_weights(&[1.0, 2.0, 4.0]);
        let eps = 4e-12;
        assert!((w[0] - (3.0 + eps)).abs() < 1e-15);
        assert!((w[1] - (2.0 + eps)).abs() < 1e-15);
        assert!((w[2] - eps).abs() < 1e-15);
        // Non-finite costs get the bare epsilon: strictly below any finite
        // cost with a positive gap, tied with the worst finite one.
        let w = fitness_weights(&[1.0, 2.0, f64::INFINITY]);
        assert!(w[2] > 0.0 && w[2] < w[0]);
        assert_eq!(w[2], w[1]);
        // Nothing finite: uniform.
        assert_eq!(fitness_weights(&[f64::INFINITY, f64::NAN]), vec![1.0, 1.0]);
    }

    #[test]
    fn roulette_matches_weight_ratios() {
        let mut rng = RngStream::new(9);
        let weights = [1.0, 3.0];
        let mut hits = [0u32; 2];
        let draws = 100_000;
        for _ in 0..draws {
            hits[roulette(&weights, &mut rng).unwrap()] += 1;
        }
        let p0 = hits[0] as f64 / draws as f64;
        assert!((p0 - 0.25).abs() < 0.01, "got {p0}");
    }

    #[test]
    fn roulette_skips_zero_weights_and_rejects_empty_wheels() {
        let mut rng = RngStream::new(10);
        for _ in 0..1000 {
            assert_eq!(roulette(&[0.0, 1.0, 0.0], &mut rng).unwrap(), 1);
        }
        assert!(roulette(&[], &mut rng).is_err());
        assert!(roulette(&[0.0, 0.0], &mut rng).is_err());
    }

    #[test]
    fn level_selection_follows_effectiveness() {
        let mut rng = RngStream::new(11);
        let eff = [5.0, 15.0, 30.0, 50.0];
        let mut hits = [0u32; 4];
        let draws = 100_000;
        for _ in 0..draws {
            hits[select_level(&eff, &mut rng).unwrap() - 1] += 1;
        }
        let want = [0.05, 0.15, 0.30, 0.50];
        for (h, w) in hits.iter().zip(&want) {
            let p = *h as f64 / draws as f64;
            assert!((p - w).abs() < 0.01, "got {p}, want {w}");
        }
    }

    // Substituted by hand: 0 + 0.5 * (10 - 0) = 5.
    #[test]
    fn move_point_is_linear_interpolation() {
        assert_eq!(move_point(&[0.0], &[10.0], 0.5), vec![5.0]);
        assert_eq!(move_point(&[1.0, 2.0], &[1.0, 2.0], 1.8), vec![1.0, 2.0]);
    }

    #[test]
    fn entailing_target_is_the_own_chain_or_self() {
        let h = default_hierarchy(12);
        let mut rng = RngStream::new(13);
        for level in 1..=3 {
            let t = select_target(&h, 7, level, OrgSelector::EntailingOrg, &mut rng).unwrap();
            assert_eq!(t, Target::Org(h.entailing_org(7, level)));
        }
        let t = select_target(&h, 7, 4, OrgSelector::EntailingOrg, &mut rng).unwrap();
        assert_eq!(t, Target::Solution(7));
    }

    #[test]
    fn exclusion_picks_the_best_other_organization() {
        let h = default_hierarchy(14);
        let mut rng = RngStream::new(15);
        for level in 1..=3 {
            let own = h.entailing_org(3, level);
            let t =
                select_target(&h, 3, level, OrgSelector::MinCostExcludingOrg, &mut rng).unwrap();
            let Target::Org(got) = t else {
                panic!("expected an organization target")
            };
            assert_ne!(got, own);
            let best = h
                .live_orgs_at(level)
                .into_iter()
                .filter(|&o| o != own)
                .min_by(|&a, &b| h.best_cost(a).partial_cmp(&h.best_cost(b)).unwrap())
                .unwrap();
            assert_eq!(got, best);
        }
        // At solution granularity the target is the best other solution.
        let t = select_target(&h, 3, 4, OrgSelector::MinCostExcludingOrg, &mut rng).unwrap();
        let Target::Solution(got) = t else {
            panic!("expected a solution target")
        };
        assert_ne!(got, 3);
        let best = (0..h.n_solutions())
            .filter(|&i| i != 3)
            .min_by(|&a, &b| h.cost(a).partial_cmp(&h.cost(b)).unwrap())
            .unwrap();
        assert_eq!(got, best);
    }

    #[test]
    fn exclusion_with_no_rival_reports_no_candidate() {
        // One organization per level: nothing to exclude to.
        let p = make_benchmark(BenchmarkId::parse("Sphere").unwrap(), 2, 0).unwrap();
        let mut budget = Budget::new(100);
        let mut rng = RngStream::new(16);
        let mut tracker = BestTracker::new();
        let cfg = HierarchyConfig {
            level_count: 2,
            children_per_level: vec![1, 5],
            initial_effectiveness: vec![1.0, 1.0],
            ..HierarchyConfig::default()
        };
        let h = Hierarchy::init(
            &p,
            &mut budget,
            &cfg,
            CenterMetric::WeightedMeanOfSolutions,
            &mut rng,
            &mut tracker,
        )
        .unwrap();
        let got = select_target(&h, 0, 1, OrgSelector::MinCostExcludingOrg, &mut rng);
        assert!(matches!(got, Err(Error::NoCandidate)));
        let got = select_target(&h, 0, 1, OrgSelector::MinCostExcludingOrgRws, &mut rng);
        assert!(matches!(got, Err(Error::NoCandidate)));
    }

    #[test]
    fn rws_exclusion_never_returns_the_source_entity() {
        let h = default_hierarchy(17);
        let mut rng = RngStream::new(18);
        for _ in 0..500 {
            let t = select_target(&h, 0, 2, OrgSelector::MinCostExcludingOrgRws, &mut rng).unwrap();
            let Target::Org(o) = t else { panic!() };
            assert_ne!(o, h.entailing_org(0, 2));
            let t = select_target(&h, 0, 4, OrgSelector::MinCostExcludingOrgRws, &mut rng).unwrap();
            let Target::Solution(s) = t else { panic!() };
            assert_ne!(s, 0);
        }
    }

    #[test]
    fn best_and_mean_selectors_match_exhaustive_scans() {
        let h = default_hierarchy(19);
        let mut rng = RngStream::new(20);
        for level in 1..=3 {
            let orgs = h.live_orgs_at(level);
            let t = select_target(&h, 5, level, OrgSelector::MinCostSolution, &mut rng).unwrap();
            let best = orgs
                .iter()
                .copied()
                .min_by(|&a, &b| h.best_cost(a).partial_cmp(&h.best_cost(b)).unwrap())
                .unwrap();
            assert_eq!(t, Target::Org(best));

            // Oracle mean: average over the solutions whose chain passes
            // through the organization.
            let mean = |org: usize| {
                let members: Vec<usize> = (0..h.n_solutions())
                    .filter(|&s| h.entailing_org(s, level) == org)
                    .collect();
                members.iter().map(|&s| h.cost(s)).sum::<f64>() / members.len() as f64
            };
            for &o in &orgs {
                assert!((h.mean_cost(o) - mean(o)).abs() < 1e-12);
            }
            let t = select_target(&h, 5, level, OrgSelector::MeanOfSubOrgCosts, &mut rng).unwrap();
            let cheapest = orgs
                .iter()
                .copied()
                .min_by(|&a, &b| mean(a).partial_cmp(&mean(b)).unwrap())
                .unwrap();
            assert_eq!(t, Target::Org(cheapest));
        }
        // At solution granularity both collapse to the globally best
        // solution, and the source's own entity stays eligible.
        let best = (0..h.n_solutions())
            .min_by(|&a, &b| h.cost(a).partial_cmp(&h.cost(b)).unwrap())
            .unwrap();
        let t = select_target(&h, best, 4, OrgSelector::MinCostSolution, &mut rng).unwrap();
        assert_eq!(t, Target::Solution(best));
        let t = select_target(&h, 5, 4, OrgSelector::MeanOfSubOrgCosts, &mut rng).unwrap();
        assert_eq!(t, Target::Solution(best));
    }

    #[test]
    fn rws_selectors_follow_fitness_weights() {
        let h = default_hierarchy(21);
        let mut rng = RngStream::new(22);
        let orgs = h.live_orgs_at(1);
        assert_eq!(orgs.len(), 2);
        let by_best = fitness_weights(&[h.best_cost(orgs[0]), h.best_cost(orgs[1])]);
        let by_mean = fitness_weights(&[h.mean_cost(orgs[0]), h.mean_cost(orgs[1])]);
        let draws = 100_000;
        let (mut best_hits, mut mean_hits) = (0u32, 0u32);
        for _ in 0..draws {
            let t = select_target(&h, 0, 1, OrgSelector::MinCostSolutionRws, &mut rng).unwrap();
            if t == Target::Org(orgs[0]) {
                best_hits += 1;
            }
            let t = select_target(&h, 0, 1, OrgSelector::MeanOfSubOrgCostsRws, &mut rng).unwrap();
            if t == Target::Org(orgs[0]) {
                mean_hits += 1;
            }
        }
        let want = by_best[0] / (by_best[0] + by_best[1]);
        let p = best_hits as f64 / draws as f64;
        assert!((p - want).abs() < 0.01, "best wheel: got {p}, want {want}");
        let want = by_mean[0] / (by_mean[0] + by_mean[1]);
        let p = mean_hits as f64 / draws as f64;
        assert!((p - want).abs() < 0.01, "mean wheel: got {p}, want {want}");
    }

    #[test]
    fn mixed_selectors_are_deterministic_at_probability_extremes() {
        let h = default_hierarchy(23);
        let mut rng = RngStream::new(24);
        let own = h.entailing_org(2, 2);
        let rival_best = h
            .live_orgs_at(2)
            .into_iter()
            .filter(|&o| o != own)
            .min_by(|&a, &b| h.best_cost(a).partial_cmp(&h.best_cost(b)).unwrap())
            .unwrap();
        for _ in 0..200 {
            let sel = OrgSelector::EntailingOrgExcludingOrg {
                entailing_probability: 1.0,
            };
            assert_eq!(
                select_target(&h, 2, 2, sel, &mut rng).unwrap(),
                Target::Org(own)
            );
            let sel = OrgSelector::EntailingOrgExcludingOrgRws {
                entailing_probability: 1.0,
            };
            assert_eq!(
                select_target(&h, 2, 2, sel, &mut rng).unwrap(),
                Target::Org(own)
            );
            let sel = OrgSelector::EntailingOrgExcludingOrg {
                entailing_probability: 0.0,
            };
            assert_eq!(
                select_target(&h, 2, 2, sel, &mut rng).unwrap(),
                Target::Org(rival_best)
            );
            let sel = OrgSelector::EntailingOrgExcludingOrgRws {
                entailing_probability: 0.0,
            };
            let Target::Org(o) = select_target(&h, 2, 2, sel, &mut rng).unwrap() else {
                panic!()
            };
            assert_ne!(o, own);
        }
    }

    #[test]
    fn mixed_selector_probability_is_validated() {
        let bad = OrgSelector::EntailingOrgExcludingOrg {
            entailing_probability: 1.5,
        };
        assert!(bad.validate().is_err());
        let bad = OrgSelector::EntailingOrgExcludingOrgRws {
            entailing_probability: -0.1,
        };
        assert!(bad.validate().is_err());
        let ok = OrgSelector::EntailingOrgExcludingOrg {
            entailing_probability: 0.5,
        };
        assert!(ok.validate().is_ok());
        assert!(OrgSelector::MinCostSolution.validate().is_ok());
    }

    #[test]
    fn uniform_selection_ignores_cost_while_fitness_favors_elites() {
        let p = make_benchmark(BenchmarkId::parse("Sphere").unwrap(), 2, 0).unwrap();
        let mut budget = Budget::new(100);
        let mut rng = RngStream::new(25);
        let mut tracker = BestTracker::new();
        let cfg = HierarchyConfig {
            level_count: 2,
            children_per_level: vec![2, 2],
            initial_effectiveness: vec![1.0, 1.0],
            ..HierarchyConfig::default()
        };
        let h = Hierarchy::init(
            &p,
            &mut budget,
            &cfg,
            CenterMetric::WeightedMeanOfSolutions,
            &mut rng,
            &mut tracker,
        )
        .unwrap();
        let draws = 40_000;
        let mut uniform_hits = vec![0u32; h.n_solutions()];
        let mut fitness_hits = vec![0u32; h.n_solutions()];
        for _ in 0..draws {
            uniform_hits[select_solution(&h, SolutionSelector::UniformRws, &mut rng).unwrap()] += 1;
            fitness_hits[select_solution(&h, SolutionSelector::FitnessRws, &mut rng).unwrap()] += 1;
        }
        for &hits in &uniform_hits {
            let p = hits as f64 / draws as f64;
            assert!((p - 0.25).abs() < 0.02, "got {p}");
        }
        let best = (0..h.n_solutions())
            .min_by(|&a, &b| h.cost(a).partial_cmp(&h.cost(b)).unwrap())
            .unwrap();
        let worst = (0..h.n_solutions())
            .max_by(|&a, &b| h.cost(a).partial_cmp(&h.cost(b)).unwrap())
            .unwrap();
        assert!(fitness_hits[best] > fitness_hits[worst]);
    }
}
