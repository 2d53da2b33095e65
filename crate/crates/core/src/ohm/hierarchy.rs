//! Region tree and membership bookkeeping for the organized hierarchy.
//!
//! Organizations form a tree of axis-aligned boxes rooted at the full search
//! box. Internal levels hold sub-organizations; the deepest level holds
//! member solutions. Regions tile their parent at construction and only ever
//! grow afterwards, so a parent region always contains its children.

use crate::ohm::selection::fitness_weights;
use crate::ohm::{CenterMetric, HierarchyConfig};
use crate::result::BestTracker;
use crate::rng::RngStream;
use crate::{Budget, Error, Problem, Result};

/// Axis-aligned box, closed on both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidConfig("region bounds length mismatch".into()));
        }
        for (&lo, &hi) in lower.iter().zip(&upper) {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidRange { lo, hi });
            }
        }
        Ok(Region { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    pub fn contains_region(&self, other: &Region) -> bool {
        self.lower.iter().zip(&other.lower).all(|(&a, &b)| a <= b)
            && self.upper.iter().zip(&other.upper).all(|(&a, &b)| b <= a)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        rng.point_in_box(&self.lower, &self.upper)
    }

    /// Grows the box just enough to contain `x`.
    pub fn include(&mut self, x: &[f64]) {
        for (i, &v) in x.iter().enumerate() {
            if v < self.lower[i] {
                self.lower[i] = v;
            }
            if v > self.upper[i] {
                self.upper[i] = v;
            }
        }
    }

    /// Widest axis; ties go to the lowest index.
    pub fn longest_axis(&self) -> usize {
        let mut axis = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            let w = hi - lo;
            if w > best {
                best = w;
                axis = i;
            }
        }
        axis
    }

    /// Cuts the box into `k` equal slabs along its longest axis. Slab edges
    /// are computed from the original bounds, so the last slab ends exactly
    /// at the original upper bound.
    pub fn split(&self, k: usize) -> Vec<Region> {
        assert!(k >= 1, "split needs at least one part");
        let axis = self.longest_axis();
        let lo = self.lower[axis];
        let width = self.upper[axis] - lo;
        (0..k)
            .map(|i| {
                let mut lower = self.lower.clone();
                let mut upper = self.upper.clone();
                lower[axis] = lo + width * i as f64 / k as f64;
                upper[axis] = if i + 1 == k {
                    self.upper[axis]
                } else {
                    lo + width * (i + 1) as f64 / k as f64
                };
                Region { lower, upper }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct OrgNode {
    level: usize,
    parent: Option<usize>,
    children: Vec<usize>,
    /// Solution indices; only deepest-level organizations hold members.
    members: Vec<usize>,
    region: Region,
    center: Vec<f64>,
    /// Lowest cost among descendant solutions.
    best_cost: f64,
    alive: bool,
}

#[derive(Debug, Clone)]
struct Solution {
    position: Vec<f64>,
    cost: f64,
    /// Id of the deepest-level organization this solution belongs to.
    home: usize,
}

/// Organization tree plus the solution population it organizes.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    nodes: Vec<OrgNode>,
    solutions: Vec<Solution>,
    root: usize,
    /// Number of granularity levels; the last one addresses solutions.
    level_count: usize,
    /// Tree level of the organizations that hold members.
    deepest_level: usize,
    metric: CenterMetric,
    capacity: usize,
}

impl Hierarchy {
    /// Builds the tree by recursive region splitting, then samples and
    /// evaluates the initial population (one evaluation per member).
    pub(crate) fn init(
        problem: &Problem,
        budget: &mut Budget,
        cfg: &HierarchyConfig,
        metric: CenterMetric,
        rng: &mut RngStream,
        tracker: &mut BestTracker,
    ) -> Result<Self> {
        cfg.validate()?;
        let deepest_level = cfg.level_count - 1;
        let root_region = Region::new(problem.lower().to_vec(), problem.upper().to_vec())?;
        let mut nodes = vec![OrgNode {
            level: 0,
            parent: None,
            children: Vec::new(),
            members: Vec::new(),
            region: root_region,
            center: Vec::new(),
            best_cost: f64::INFINITY,
            alive: true,
        }];

        let mut frontier = vec![0usize];
        for level in 1..cfg.level_count {
            let parts = cfg.children_per_level[level - 1];
            let mut next = Vec::with_capacity(frontier.len() * parts);
            for &parent in &frontier {
                for region in nodes[parent].region.split(parts) {
                    let id = nodes.len();
                    nodes.push(OrgNode {
                        level,
                        parent: Some(parent),
                        children: Vec::new(),
                        members: Vec::new(),
                        region,
                        center: Vec::new(),
                        best_cost: f64::INFINITY,
                        alive: true,
                    });
                    nodes[parent].children.push(id);
                    next.push(id);
                }
            }
            frontier = next;
        }

        let members_per_org = cfg.children_per_level[cfg.level_count - 1];
        let mut solutions = Vec::with_capacity(frontier.len() * members_per_org);
        for &org in &frontier {
            for _ in 0..members_per_org {
                let position = nodes[org].region.sample(rng);
                let cost = problem.evaluate(budget, &position)?;
                tracker.observe(&position, cost);
                let idx = solutions.len();
                solutions.push(Solution {
                    position,
                    cost,
                    home: org,
                });
                nodes[org].members.push(idx);
            }
        }

        let capacity = solutions.len();
        let mut h = Hierarchy {
            nodes,
            solutions,
            root: 0,
            level_count: cfg.level_count,
            deepest_level,
            metric,
            capacity,
        };
        // Children were created after their parents, so reverse id order is
        // bottom-up.
        for id in (0..h.nodes.len()).rev() {
            h.recompute(id);
        }
        Ok(h)
    }

    pub fn level_count(&self) -> usize {
        self.level_count
    }

    pub fn deepest_level(&self) -> usize {
        self.deepest_level
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn n_solutions(&self) -> usize {
        self.solutions.len()
    }

    pub fn n_live_orgs(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn position(&self, sol: usize) -> &[f64] {
        &self.solutions[sol].position
    }

    pub fn cost(&self, sol: usize) -> f64 {
        self.solutions[sol].cost
    }

    pub fn home(&self, sol: usize) -> usize {
        self.solutions[sol].home
    }

    pub fn solution_costs(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.cost).collect()
    }

    pub fn center(&self, org: usize) -> &[f64] {
        &self.nodes[org].center
    }

    pub fn best_cost(&self, org: usize) -> f64 {
        self.nodes[org].best_cost
    }

    /// Mean cost over every solution the organization entails. Live
    /// organizations always hold at least one solution.
    pub fn mean_cost(&self, org: usize) -> f64 {
        let mut members = Vec::new();
        self.collect_descendants(org, &mut members);
        members.iter().map(|&s| self.solutions[s].cost).sum::<f64>() / members.len() as f64
    }

    pub fn region(&self, org: usize) -> &Region {
        &self.nodes[org].region
    }

    pub fn org_level(&self, org: usize) -> usize {
        self.nodes[org].level
    }

    pub fn is_alive(&self, org: usize) -> bool {
        self.nodes[org].alive
    }

    pub fn live_orgs_at(&self, level: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].alive && self.nodes[i].level == level)
            .collect()
    }

    /// Ancestor organization of `sol` at the given tree level.
    pub fn entailing_org(&self, sol: usize, level: usize) -> usize {
        debug_assert!(level >= 1 && level <= self.deepest_level);
        let mut org = self.solutions[sol].home;
        while self.nodes[org].level > level {
            org = self.nodes[org].parent.expect("non-root nodes have parents");
        }
        org
    }

    /// Adds an offspring solution and returns its index. It joins the first
    /// live deepest organization whose region contains it; when none does,
    /// the chain above `fallback_home` grows to cover it and it joins there.
    /// The population may transiently exceed capacity; callers restore the
    /// cap with `enforce_capacity`.
    pub(crate) fn insert_solution(
        &mut self,
        position: Vec<f64>,
        cost: f64,
        fallback_home: usize,
    ) -> usize {
        let contained = (0..self.nodes.len()).find(|&i| {
            self.nodes[i].alive
                && self.nodes[i].level == self.deepest_level
                && self.nodes[i].region.contains(&position)
        });
        let home = match contained {
            Some(org) => org,
            None => {
                // Grow the whole chain so parent regions keep containing
                // their children.
                let mut cur = Some(fallback_home);
                while let Some(org) = cur {
                    self.nodes[org].region.include(&position);
                    cur = self.nodes[org].parent;
                }
                fallback_home
            }
        };
        let idx = self.solutions.len();
        self.solutions.push(Solution {
            position,
            cost,
            home,
        });
        self.nodes[home].members.push(idx);
        self.refresh_chain(home);
        idx
    }

    /// Removes worst-cost solutions until the population fits `cap`.
    pub(crate) fn enforce_capacity(&mut self, cap: usize) -> usize {
        let mut removed = 0;
        while self.solutions.len() > cap {
            let worst = self
                .solutions
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cost.partial_cmp(&b.1.cost).unwrap())
                .map(|(i, _)| i)
                .expect("population is non-empty");
            self.remove_solution(worst);
            removed += 1;
        }
        removed
    }

    fn remove_solution(&mut self, sol: usize) {
        let home = self.solutions[sol].home;
        self.nodes[home].members.retain(|&m| m != sol);
        let last = self.solutions.len() - 1;
        self.solutions.swap_remove(sol);
        if sol != last {
            // The former last solution now lives at index `sol`.
            let moved_home = self.solutions[sol].home;
            for m in self.nodes[moved_home].members.iter_mut() {
                if *m == last {
                    *m = sol;
                }
            }
        }
        let live = self.prune_upward(home);
        self.refresh_chain(live);
    }

    /// Marks `org` and any emptied ancestors dead, stopping at the root.
    /// Returns the lowest ancestor that is still alive.
    fn prune_upward(&mut self, org: usize) -> usize {
        let mut cur = org;
        loop {
            let node = &self.nodes[cur];
            let empty = if node.level == self.deepest_level {
                node.members.is_empty()
            } else {
                node.children.iter().all(|&c| !self.nodes[c].alive)
            };
            if cur == self.root || !empty {
                return cur;
            }
            self.nodes[cur].alive = false;
            let parent = self.nodes[cur].parent.expect("non-root");
            self.nodes[parent].children.retain(|&c| c != cur);
            cur = parent;
        }
    }

    fn refresh_chain(&mut self, start: usize) {
        let mut cur = Some(start);
        while let Some(org) = cur {
            self.recompute(org);
            cur = self.nodes[org].parent;
        }
    }

    fn collect_descendants(&self, org: usize, out: &mut Vec<usize>) {
        let node = &self.nodes[org];
        if node.level == self.deepest_level {
            out.extend_from_slice(&node.members);
        } else {
            for &c in &node.children {
                if self.nodes[c].alive {
                    self.collect_descendants(c, out);
                }
            }
        }
    }

    fn weighted_mean(points: &[&[f64]], weights: &[f64]) -> Vec<f64> {
        let dim = points[0].len();
        let total: f64 = weights.iter().sum();
        let mut mean = vec![0.0; dim];
        for (p, &w) in points.iter().zip(weights) {
            for (m, &v) in mean.iter_mut().zip(p.iter()) {
                *m += w * v;
            }
        }
        for m in &mut mean {
            *m /= total;
        }
        mean
    }

    /// Recomputes the cached center and best descendant cost of one node.
    /// Callers must go bottom-up so child caches are fresh.
    fn recompute(&mut self, org: usize) {
        let node = &self.nodes[org];
        let is_deepest = node.level == self.deepest_level;

        let best_cost = if is_deepest {
            node.members
                .iter()
                .map(|&m| self.solutions[m].cost)
                .fold(f64::INFINITY, f64::min)
        } else {
            node.children
                .iter()
                .filter(|&&c| self.nodes[c].alive)
                .map(|&c| self.nodes[c].best_cost)
                .fold(f64::INFINITY, f64::min)
        };

        let center = match self.metric {
            CenterMetric::WeightedMeanOfSolutions => {
                let mut ids = Vec::new();
                self.collect_descendants(org, &mut ids);
                let points: Vec<&[f64]> = ids
                    .iter()
                    .map(|&i| self.solutions[i].position.as_slice())
                    .collect();
                let costs: Vec<f64> = ids.iter().map(|&i| self.solutions[i].cost).collect();
                Self::weighted_mean(&points, &fitness_weights(&costs))
            }
            CenterMetric::MinCostSolution => {
                let mut ids = Vec::new();
                self.collect_descendants(org, &mut ids);
                let best = ids
                    .iter()
                    .min_by(|&&a, &&b| {
                        self.solutions[a]
                            .cost
                            .partial_cmp(&self.solutions[b].cost)
                            .unwrap()
                    })
                    .expect("live organizations have descendants");
                self.solutions[*best].position.clone()
            }
            CenterMetric::MeanOfSubOrganizations => {
                if is_deepest {
                    let points: Vec<&[f64]> = node
                        .members
                        .iter()
                        .map(|&m| self.solutions[m].position.as_slice())
                        .collect();
                    let w = vec![1.0; points.len()];
                    Self::weighted_mean(&points, &w)
                } else {
                    let points: Vec<&[f64]> = node
                        .children
                        .iter()
                        .filter(|&&c| self.nodes[c].alive)
                        .map(|&c| self.nodes[c].center.as_slice())
                        .collect();
                    let w = vec![1.0; points.len()];
                    Self::weighted_mean(&points, &w)
                }
            }
            CenterMetric::WeightedMeanOfSubOrganizations => {
                if is_deepest {
                    let points: Vec<&[f64]> = node
                        .members
                        .iter()
                        .map(|&m| self.solutions[m].position.as_slice())
                        .collect();
                    let costs: Vec<f64> = node
                        .members
                        .iter()
                        .map(|&m| self.solutions[m].cost)
                        .collect();
                    Self::weighted_mean(&points, &fitness_weights(&costs))
                } else {
                    let live: Vec<usize> = node
                        .children
                        .iter()
                        .filter(|&&c| self.nodes[c].alive)
                        .cloned()
                        .collect();
                    let points: Vec<&[f64]> = live
                        .iter()
                        .map(|&c| self.nodes[c].center.as_slice())
                        .collect();
                    let costs: Vec<f64> = live.iter().map(|&c| self.nodes[c].best_cost).collect();
                    Self::weighted_mean(&points, &fitness_weights(&costs))
                }
            }
            CenterMetric::RegionCenter => node.region.center(),
        };

        self.nodes[org].center = center;
        self.nodes[org].best_cost = best_cost;
    }

    /// Verifies every structural invariant, returning a description of the
    /// first violation found.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let root = &self.nodes[self.root];
        if !root.alive || root.level != 0 || root.parent.is_some() {
            return Err("root must be a live level-0 node without a parent".into());
        }
        if self.solutions.len() > self.capacity {
            return Err(format!(
                "population {} exceeds capacity {}",
                self.solutions.len(),
                self.capacity,
            ));
        }

        let mut member_total = 0;
        for (id, node) in self.nodes.iter().enumerate() {
            if !node.alive {
                if self
                    .nodes
                    .iter()
                    .any(|n| n.alive && n.children.contains(&id))
                {
                    return Err(format!("dead node {id} is still referenced by a parent"));
                }
                if self.solutions.iter().any(|s| s.home == id) {
                    return Err(format!("dead node {id} is still a home"));
                }
                continue;
            }
            for &c in &node.children {
                let child = &self.nodes[c];
                if !child.alive {
                    return Err(format!("live node {id} lists dead child {c}"));
                }
                if child.parent != Some(id) {
                    return Err(format!("child {c} does not point back to parent {id}"));
                }
                if child.level != node.level + 1 {
                    return Err(format!("child {c} level is not parent level + 1"));
                }
                if !node.region.contains_region(&child.region) {
                    return Err(format!("node {id} region does not contain child {c}"));
                }
            }
            if node.level == self.deepest_level {
                if !node.children.is_empty() {
                    return Err(format!("deepest node {id} has children"));
                }
                if node.members.is_empty() {
                    return Err(format!("live deepest node {id} has no members"));
                }
                member_total += node.members.len();
                for &m in &node.members {
                    if m >= self.solutions.len() {
                        return Err(format!("node {id} lists out-of-range member {m}"));
                    }
                    if self.solutions[m].home != id {
                        return Err(format!(
                            "member {m} of node {id} has home {}",
                            self.solutions[m].home
                        ));
                    }
                }
                let mut sorted = node.members.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != node.members.len() {
                    return Err(format!("node {id} lists a member twice"));
                }
            } else {
                if !node.members.is_empty() {
                    return Err(format!("internal node {id} holds members"));
                }
                if node.children.iter().all(|&c| !self.nodes[c].alive) && id != self.root {
                    return Err(format!("internal node {id} is alive with no live children"));
                }
            }
        }

        if member_total != self.solutions.len() {
            return Err(format!(
                "membership covers {member_total} of {} solutions",
                self.solutions.len(),
            ));
        }

        for (i, sol) in self.solutions.iter().enumerate() {
            let home = &self.nodes[sol.home];
            if !home.alive || home.level != self.deepest_level {
                return Err(format!("solution {i} home is not a live deepest node"));
            }
            if sol.position.iter().any(|v| !v.is_finite()) {
                return Err(format!("solution {i} position is not finite"));
            }
            let mut cur = Some(sol.home);
            while let Some(org) = cur {
                if !self.nodes[org].region.contains(&sol.position) {
                    return Err(format!("solution {i} escapes the region of ancestor {org}"));
                }
                cur = self.nodes[org].parent;
            }
        }

        // Cached aggregates must match a fresh recomputation.
        let mut fresh = self.clone();
        for id in (0..fresh.nodes.len()).rev() {
            if fresh.nodes[id].alive {
                fresh.recompute(id);
            }
        }
        for (id, (a, b)) in self.nodes.iter().zip(&fresh.nodes).enumerate() {
            if !a.alive {
                continue;
            }
            let center_ok = a
                .center
                .iter()
                .zip(&b.center)
                .all(|(&x, &y)| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0));
            if a.center.len() != b.center.len() || !center_ok {
                return Err(format!("node {id} center cache is stale"));
            }
            let best_ok = if a.best_cost.is_finite() || b.best_cost.is_finite() {
                (a.best_cost - b.best_cost).abs()
                    <= 1e-9 * a.best_cost.abs().max(b.best_cost.abs()).max(1.0)
            } else {
                true
            };
            if !best_ok {
                return Err(format!("node {id} best-cost cache is stale"));
            }
        }
        Ok(())
    }
}
