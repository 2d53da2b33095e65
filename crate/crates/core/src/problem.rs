//! Bounded continuous minimization problems and evaluation budgets.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

type CostFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A continuous minimization problem over an axis-aligned box.
///
/// The objective is treated as a black box. Non-finite objective values are
/// mapped to `+inf` by [`Problem::evaluate`], so optimizers only ever see
/// ordered costs.
#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Arc<CostFn>,
    known_optimum: Option<(Vec<f64>, f64)>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("known_optimum", &self.known_optimum)
            .finish()
    }
}

impl Problem {
    /// Builds a problem. Bounds must satisfy `lower[d] < upper[d]` in every
    /// coordinate.
    pub fn new(
        name: impl Into<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        cost: Arc<CostFn>,
    ) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidConfig(
                "bounds must be non-empty and of equal length".into(),
            ));
        }
        for (&lo, &hi) in lower.iter().zip(&upper) {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidRange { lo, hi });
            }
        }
        Ok(Problem {
            name: name.into(),
            dim: lower.len(),
            lower,
            upper,
            cost,
            known_optimum: None,
        })
    }

    /// Attaches the location and value of the known global optimum.
    pub fn with_known_optimum(mut self, position: Vec<f64>, value: f64) -> Self {
        debug_assert_eq!(position.len(), self.dim);
        self.known_optimum = Some((position, value));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn known_optimum(&self) -> Option<(&[f64], f64)> {
        self.known_optimum.as_ref().map(|(x, v)| (x.as_slice(), *v))
    }

    /// The raw objective closure. Does not touch any budget; use
    /// [`Problem::evaluate`] inside optimizers.
    pub fn cost_fn(&self) -> Arc<CostFn> {
        Arc::clone(&self.cost)
    }

    /// Raw objective value without budget accounting or the `+inf` mapping.
    pub fn raw_cost(&self, x: &[f64]) -> f64 {
        (self.cost)(x)
    }

    /// Evaluates the objective, charging exactly one unit of budget.
    ///
    /// Non-finite objective values come back as `+inf`.
    pub fn evaluate(&self, budget: &mut Budget, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        budget.charge()?;
        let c = (self.cost)(x);
        Ok(if c.is_finite() { c } else { f64::INFINITY })
    }

    /// Clamps a point to the box, coordinate by coordinate.
    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(d, &v)| v.clamp(self.lower[d], self.upper[d]))
            .collect()
    }

    /// In-place variant of [`Problem::clamp`].
    pub fn clamp_in_place(&self, x: &mut [f64]) {
        for (d, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[d], self.upper[d]);
        }
    }

    /// True when `x` lies inside the box (inclusive).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter()
                .enumerate()
                .all(|(d, &v)| v >= self.lower[d] && v <= self.upper[d])
    }
}

/// Exact function-evaluation accounting.
///
/// Every objective evaluation charges one unit; [`Budget::charge`] fails with
/// [`Error::BudgetExhausted`] once `nfe_used == nfe_max`, so `nfe_used` can
/// never exceed `nfe_max`.
#[derive(Debug, Clone)]
pub struct Budget {
    nfe_max: u64,
    nfe_used: u64,
}

impl Budget {
    pub fn new(nfe_max: u64) -> Self {
        Budget {
            nfe_max,
            nfe_used: 0,
        }
    }

    pub fn nfe_max(&self) -> u64 {
        self.nfe_max
    }

    pub fn nfe_used(&self) -> u64 {
        self.nfe_used
    }

    pub fn remaining(&self) -> u64 {
        self.nfe_max - self.nfe_used
    }

    pub fn is_exhausted(&self) -> bool {
        self.nfe_used >= self.nfe_max
    }

    /// Consumes one evaluation.
    pub fn charge(&mut self) -> Result<()> {
        if self.is_exhausted() {
            return Err(Error::BudgetExhausted);
        }
        self.nfe_used += 1;
        Ok(())
    }

    /// Splits off a child budget of at most `n` evaluations, capped by what
    /// remains here. Spend the child, then return it via [`Budget::absorb`].
    pub fn reserve(&mut self, n: u64) -> Budget {
        Budget::new(n.min(self.remaining()))
    }

    /// Adds a child budget's consumption back into this one.
    pub fn absorb(&mut self, child: &Budget) {
        self.nfe_used = (self.nfe_used + child.nfe_used).min(self.nfe_max);
        debug_assert!(self.nfe_used <= self.nfe_max);
    }
}
