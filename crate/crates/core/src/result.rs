//! Run results shared by all optimizers.

use serde::{Deserialize, Serialize};

/// Outcome of one optimizer run.
///
/// `trajectory` holds the best cost seen so far, recorded once after
/// initialization and once per iteration (or round, for the hybrid
/// optimizers), so it is non-increasing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    pub trajectory: Vec<f64>,
    pub nfe_used: u64,
}

/// Tracks the incumbent best across a run.
#[derive(Debug, Clone)]
pub struct BestTracker {
    pub position: Vec<f64>,
    pub cost: f64,
    pub trajectory: Vec<f64>,
}

impl BestTracker {
    pub fn new() -> Self {
        BestTracker {
            position: Vec::new(),
            cost: f64::INFINITY,
            trajectory: Vec::new(),
        }
    }

    /// Records a candidate, keeping the incumbent when the candidate is
    /// worse. Returns true when the incumbent improved.
    pub fn observe(&mut self, x: &[f64], cost: f64) -> bool {
        if cost < self.cost {
            self.cost = cost;
            self.position = x.to_vec();
            true
        } else {
            false
        }
    }

    /// Appends the current incumbent cost to the trajectory.
    pub fn snapshot(&mut self) {
        self.trajectory.push(self.cost);
    }

    pub fn into_result(self, nfe_used: u64) -> RunResult {
        RunResult {
            best_position: self.position,
            best_cost: self.cost,
            trajectory: self.trajectory,
            nfe_used,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracker_keeps_minimum_and_monotone_trajectory() {
        let mut t = BestTracker::new();
        assert!(t.observe(&[1.0], 5.0));
        t.snapshot();
        assert!(!t.observe(&[2.0], 9.0));
        t.snapshot();
        assert!(t.observe(&[3.0], 1.0));
        t.snapshot();
        let r = t.into_result(3);
        assert_eq!(r.best_cost, 1.0);
        assert_eq!(r.best_position, vec![3.0]);
        assert_eq!(r.trajectory, vec![5.0, 5.0, 1.0]);
        for w in r.trajectory.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}
