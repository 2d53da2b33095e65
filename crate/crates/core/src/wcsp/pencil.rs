//! Largest-eigenpair solvers for the symmetric pencil `A w = lambda B w`
//! with symmetric positive semi-definite `A` and `B`.

use nalgebra::{DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::rng::RngStream;
use crate::{Error, Result};

/// Iteration count used when no explicit solver is configured.
pub const DEFAULT_POWER_ITERS: usize = 7;

/// Strategy for extracting the dominant generalized eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PencilSolver {
    /// Fixed number of inverse-weighted power steps from a seeded random
    /// start. Cheap, and accurate enough for optimization; the eigenvector
    /// carries an `O(convergence gap)` error.
    PowerIteration { iters: usize },
    /// Full reduction to an ordinary symmetric eigenproblem. Exact up to
    /// roundoff.
    Dense,
}

impl Default for PencilSolver {
    fn default() -> Self {
        PencilSolver::PowerIteration {
            iters: DEFAULT_POWER_ITERS,
        }
    }
}

impl PencilSolver {
    pub fn solve(
        &self,
        a: &DMatrix<f64>,
        b: &DMatrix<f64>,
        start_seed: u64,
    ) -> Result<(f64, DVector<f64>)> {
        match *self {
            PencilSolver::PowerIteration { iters } => {
                power_iteration_pencil(a, b, iters, start_seed)
            }
            PencilSolver::Dense => dense_pencil(a, b),
        }
    }
}

fn check_pencil(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() || a.is_empty() {
        return Err(Error::InvalidConfig(
            "pencil matrices must be square and of equal size".into(),
        ));
    }
    Ok(())
}

/// Cholesky of `B`, retrying once with a relative ridge when `B` is only
/// semi-definite. Returns the matrix that was actually factored alongside
/// the factorization; every later `B`-weighted product must use that matrix,
/// or null-space components of `B` grow unchecked.
fn cholesky_with_ridge(
    b: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, nalgebra::linalg::Cholesky<f64, Dyn>)> {
    if let Some(c) = nalgebra::linalg::Cholesky::new(b.clone()) {
        return Ok((b.clone(), c));
    }
    let n = b.nrows();
    let ridge = 1e-8 * b.trace() / n as f64;
    if !(ridge > 0.0) {
        return Err(Error::IllConditioned);
    }
    let reg = b + DMatrix::identity(n, n) * ridge;
    match nalgebra::linalg::Cholesky::new(reg.clone()) {
        Some(c) => Ok((reg, c)),
        None => Err(Error::IllConditioned),
    }
}

/// Inverse power iteration on `B^-1 A` with B-norm rescaling each step.
/// The start vector is drawn deterministically from `start_seed`, so equal
/// inputs give equal outputs. Returns the Rayleigh estimate and the
/// Euclidean-normalized eigenvector estimate.
pub fn power_iteration_pencil(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    iters: usize,
    start_seed: u64,
) -> Result<(f64, DVector<f64>)> {
    check_pencil(a, b)?;
    let (beff, chol) = cholesky_with_ridge(b)?;
    let n = a.nrows();
    let mut rng = RngStream::derived(start_seed, &["pencil-start"]);
    let mut w = DVector::from_fn(n, |_, _| rng.normal());
    let nb = w.dot(&(&beff * &w)).sqrt();
    if !(nb > 0.0) || !nb.is_finite() {
        return Err(Error::IllConditioned);
    }
    w /= nb;
    for _ in 0..iters {
        let y = chol.solve(&(a * &w));
        let nb = y.dot(&(&beff * &y)).sqrt();
        if !(nb > 0.0) || !nb.is_finite() {
            return Err(Error::IllConditioned);
        }
        w = y / nb;
    }
    let num = w.dot(&(a * &w));
    let den = w.dot(&(&beff * &w));
    let unit = &w / w.norm();
    Ok((num / den, unit))
}

/// Exact reduction: with `B = L L^T`, the pencil shares eigenvalues with the
/// symmetric matrix `L^-1 A L^-T`, whose top eigenvector maps back through
/// `L^-T`. Returns the Euclidean-normalized eigenvector.
pub fn dense_pencil(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    check_pencil(a, b)?;
    let (_, chol) = cholesky_with_ridge(b)?;
    let l = chol.l();
    let y = l.solve_lower_triangular(a).ok_or(Error::IllConditioned)?;
    let m = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::IllConditioned)?
        .transpose();
    // Symmetrize away the roundoff so the symmetric solver sees clean input.
    let m = (&m + m.transpose()) * 0.5;
    let eig = nalgebra::linalg::SymmetricEigen::new(m);
    let mut idx = 0;
    let mut lambda = f64::NEG_INFINITY;
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v > lambda {
            lambda = v;
            idx = i;
        }
    }
    let v = eig.eigenvectors.column(idx).into_owned();
    let w = l
        .transpose()
        .solve_upper_triangular(&v)
        .ok_or(Error::IllConditioned)?;
    let unit = &w / w.norm();
    Ok((lambda, unit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(values))
    }

    // Hand-checked: quotients along the axes are 3 and 1.
    #[test]
    fn dense_solves_a_diagonal_pencil() {
        let (lambda, w) = dense_pencil(&diag(&[3.0, 1.0]), &DMatrix::identity(2, 2)).unwrap();
        assert!((lambda - 3.0).abs() < 1e-12);
        assert!((w[0].abs() - 1.0).abs() < 1e-12);
        assert!(w[1].abs() < 1e-12);
    }

    // Hand-checked: quotients are 2/1 and 1/4, so the top pair is (2, e1).
    #[test]
    fn dense_respects_the_b_weighting() {
        let (lambda, w) = dense_pencil(&diag(&[2.0, 1.0]), &diag(&[1.0, 4.0])).unwrap();
        assert!((lambda - 2.0).abs() < 1e-12);
        assert!((w[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_dense_given_enough_steps() {
        let mut rng = RngStream::new(31);
        let n = 8;
        let r = DMatrix::from_fn(n, n, |_, _| rng.normal());
        let s = DMatrix::from_fn(n, n, |_, _| rng.normal());
        let b = &r * r.transpose() + DMatrix::identity(n, n);
        let a = &s * s.transpose();
        let (ld, wd) = dense_pencil(&a, &b).unwrap();
        let (lp, wp) = power_iteration_pencil(&a, &b, 300, 7).unwrap();
        assert!((ld - lp).abs() <= 1e-8 * ld.abs().max(1.0), "{ld} vs {lp}");
        // Eigenvectors match up to sign.
        let dot = wd.dot(&wp).abs();
        assert!((dot - 1.0).abs() < 1e-8, "alignment {dot}");
    }

    #[test]
    fn power_iteration_is_deterministic_in_the_seed() {
        let a = diag(&[2.0, 1.0, 0.5]);
        let b = DMatrix::identity(3, 3);
        let r1 = power_iteration_pencil(&a, &b, 7, 99).unwrap();
        let r2 = power_iteration_pencil(&a, &b, 7, 99).unwrap();
        assert_eq!(r1.0, r2.0);
        assert_eq!(r1.1, r2.1);
    }

    #[test]
    fn semidefinite_b_gets_a_ridge_instead_of_failing() {
        let a = DMatrix::identity(2, 2);
        let b = diag(&[1.0, 0.0]);
        let (lambda, w) = dense_pencil(&a, &b).unwrap();
        assert!(lambda.is_finite() && lambda > 0.0);
        assert!((w.norm() - 1.0).abs() < 1e-12);
        let (lambda, _) = power_iteration_pencil(&a, &b, 50, 1).unwrap();
        assert!(lambda.is_finite() && lambda > 0.0);
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::identity(3, 3);
        assert!(dense_pencil(&a, &b).is_err());
    }
}
