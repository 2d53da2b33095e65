//! Trial-weighted covariance discrimination.
//!
//! Given per-trial channel covariances for two signal classes, the task is
//! to weight trials (numerator weights `a` for the target class, denominator
//! weights `b` over both classes) so that the dominant generalized
//! eigenvalue of the weighted covariance pencil separates the target class
//! as strongly as possible. Flattened weight vectors `x = [a, b]` live in
//! the unit box and are renormalized onto the probability simplex before
//! every evaluation; the cost is the negated top eigenvalue, so lower is
//! better.

pub mod pencil;

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::hybrid::GradProblem;
use crate::rng::{derive_seed, RngStream};
use crate::{Error, Problem, Result};

pub use pencil::{dense_pencil, power_iteration_pencil, PencilSolver, DEFAULT_POWER_ITERS};

/// Sample covariance of a channels-by-samples window, normalized to unit
/// trace.
pub fn normalized_covariance(e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if e.nrows() == 0 || e.ncols() == 0 {
        return Err(Error::DegenerateTrial);
    }
    let c = e * e.transpose();
    let tr = c.trace();
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(Error::DegenerateTrial);
    }
    Ok(c / tr)
}

/// Clips negatives to zero and renormalizes to sum one. A vector with no
/// positive mass degrades to the uniform distribution.
pub fn simplex_project(v: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect();
    let sum: f64 = clipped.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        clipped.into_iter().map(|x| x / sum).collect()
    } else {
        vec![1.0 / v.len() as f64; v.len()]
    }
}

/// Paired per-trial covariances for the two classes. Every matrix is
/// square, symmetric, positive semi-definite, and unit-trace; both classes
/// hold the same number of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    n_channels: usize,
    class1: Vec<DMatrix<f64>>,
    class2: Vec<DMatrix<f64>>,
}

const TRIALS_FORMAT: &str = "wcsp-trials";
const TRIALS_VERSION: u32 = 1;

/// On-disk shape of a [`TrialSet`]: a self-describing JSON container with
/// row-major matrices.
#[derive(Serialize, Deserialize)]
struct TrialSetFile {
    format: String,
    version: u32,
    n_channels: usize,
    n_trials: usize,
    class1: Vec<Vec<Vec<f64>>>,
    class2: Vec<Vec<Vec<f64>>>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

fn rows_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidConfig("matrix rows must be square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

impl TrialSet {
    pub fn new(class1: Vec<DMatrix<f64>>, class2: Vec<DMatrix<f64>>) -> Result<Self> {
        if class1.is_empty() || class1.len() != class2.len() {
            return Err(Error::InvalidConfig(
                "classes must hold the same positive number of trials".into(),
            ));
        }
        let n = class1[0].nrows();
        for m in class1.iter().chain(&class2) {
            Self::validate_covariance(m, n)?;
        }
        Ok(TrialSet {
            n_channels: n,
            class1,
            class2,
        })
    }

    fn validate_covariance(m: &DMatrix<f64>, n: usize) -> Result<()> {
        if m.nrows() != n || m.ncols() != n || n == 0 {
            return Err(Error::InvalidConfig(
                "covariances must be square and equally sized".into(),
            ));
        }
        for r in 0..n {
            for c in (r + 1)..n {
                if (m[(r, c)] - m[(c, r)]).abs() > 1e-9 {
                    return Err(Error::InvalidConfig("covariance is not symmetric".into()));
                }
            }
        }
        if (m.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig("covariance trace must be one".into()));
        }
        let eig = nalgebra::linalg::SymmetricEigen::new(m.clone());
        if eig.eigenvalues.iter().any(|&v| v < -1e-9) {
            return Err(Error::InvalidConfig(
                "covariance is not positive semi-definite".into(),
            ));
        }
        Ok(())
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_trials(&self) -> usize {
        self.class1.len()
    }

    /// Trials of one class; `class` is 1 or 2.
    pub fn class(&self, class: usize) -> &[DMatrix<f64>] {
        match class {
            1 => &self.class1,
            2 => &self.class2,
            _ => panic!("class must be 1 or 2"),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = TrialSetFile {
            format: TRIALS_FORMAT.into(),
            version: TRIALS_VERSION,
            n_channels: self.n_channels,
            n_trials: self.n_trials(),
            class1: self.class1.iter().map(matrix_rows).collect(),
            class2: self.class2.iter().map(matrix_rows).collect(),
        };
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: TrialSetFile = serde_json::from_str(&text)?;
        if file.format != TRIALS_FORMAT || file.version != TRIALS_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported trial container {}/{}",
                file.format, file.version
            )));
        }
        let class1 = file
            .class1
            .iter()
            .map(|rows| rows_matrix(rows))
            .collect::<Result<Vec<_>>>()?;
        let class2 = file
            .class2
            .iter()
            .map(|rows| rows_matrix(rows))
            .collect::<Result<Vec<_>>>()?;
        let set = TrialSet::new(class1, class2)?;
        if set.n_channels != file.n_channels || set.n_trials() != file.n_trials {
            return Err(Error::InvalidConfig(
                "trial container header disagrees with its payload".into(),
            ));
        }
        Ok(set)
    }
}

/// One discrimination task: a trial set, the target class, and the pencil
/// solver to use. The flattened decision vector is `x = [a, b]` with one
/// numerator and one denominator weight per trial.
#[derive(Debug, Clone)]
pub struct WcspInstance {
    trials: TrialSet,
    class: usize,
    solver: PencilSolver,
    start_seed: u64,
}

impl WcspInstance {
    pub fn new(
        trials: TrialSet,
        class: usize,
        solver: PencilSolver,
        start_seed: u64,
    ) -> Result<Self> {
        if class != 1 && class != 2 {
            return Err(Error::InvalidConfig("target class must be 1 or 2".into()));
        }
        Ok(WcspInstance {
            trials,
            class,
            solver,
            start_seed,
        })
    }

    pub fn trials(&self) -> &TrialSet {
        &self.trials
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn solver(&self) -> PencilSolver {
        self.solver
    }

    pub fn n_trials(&self) -> usize {
        self.trials.n_trials()
    }

    /// Decision-vector length: one numerator and one denominator weight per
    /// trial.
    pub fn dim(&self) -> usize {
        2 * self.trials.n_trials()
    }

    fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        assert_eq!(x.len(), self.dim(), "weight vector length");
        x.split_at(self.trials.n_trials())
    }

    /// Weighted pencil at already-normalized weights.
    fn build_pencil(&self, a_hat: &[f64], b_hat: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.trials.n_channels();
        let target = self.trials.class(self.class);
        let c1 = self.trials.class(1);
        let c2 = self.trials.class(2);
        let mut a_mat = DMatrix::zeros(n, n);
        let mut b_mat = DMatrix::zeros(n, n);
        for (i, &w) in a_hat.iter().enumerate() {
            a_mat += &target[i] * w;
        }
        for (i, &w) in b_hat.iter().enumerate() {
            b_mat += (&c1[i] + &c2[i]) * w;
        }
        (a_mat, b_mat)
    }

    /// Negated top generalized eigenvalue at the renormalized weights.
    /// Solver failures surface as `+inf` so optimizers treat them as
    /// arbitrarily bad.
    pub fn cost_flat(&self, x: &[f64]) -> f64 {
        let (a, b) = self.split(x);
        let a_hat = simplex_project(a);
        let b_hat = simplex_project(b);
        let (a_mat, b_mat) = self.build_pencil(&a_hat, &b_hat);
        match self.solver.solve(&a_mat, &b_mat, self.start_seed) {
            Ok((lambda, _)) => -lambda,
            Err(_) => f64::INFINITY,
        }
    }

    /// Gradient of [`cost_flat`](Self::cost_flat) at `x`, exact wherever all
    /// weights are strictly positive (the clipping in the projection is
    /// inactive there). The eigenvector is held fixed, which is exact at the
    /// true eigenpair; prefer the dense solver when comparing against finite
    /// differences.
    pub fn grad_flat(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (a, b) = self.split(x);
        let (g_a, g_b, a_clip, b_clip) = self.raw_gradient(a, b)?;
        let sa: f64 = a_clip.iter().sum();
        let sb: f64 = b_clip.iter().sum();
        let a_hat = simplex_project(a);
        let b_hat = simplex_project(b);
        // Renormalization removes the radial component: moving mass along
        // the current direction cannot change the cost.
        let dot_a: f64 = g_a.iter().zip(&a_hat).map(|(g, w)| g * w).sum();
        let dot_b: f64 = g_b.iter().zip(&b_hat).map(|(g, w)| g * w).sum();
        let mut out = Vec::with_capacity(self.dim());
        for (i, &g) in g_a.iter().enumerate() {
            out.push(if a[i] > 0.0 { (g - dot_a) / sa } else { 0.0 });
        }
        for (i, &g) in g_b.iter().enumerate() {
            out.push(if b[i] > 0.0 { (g - dot_b) / sb } else { 0.0 });
        }
        Ok(out)
    }

    /// Partial derivatives with respect to the normalized weights
    /// themselves, without the renormalization correction.
    pub fn grad_flat_raw(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (a, b) = self.split(x);
        let (g_a, g_b, _, _) = self.raw_gradient(a, b)?;
        Ok(g_a.into_iter().chain(g_b).collect())
    }

    #[allow(clippy::type_complexity)]
    fn raw_gradient(
        &self,
        a: &[f64],
        b: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let a_hat = simplex_project(a);
        let b_hat = simplex_project(b);
        let (a_mat, b_mat) = self.build_pencil(&a_hat, &b_hat);
        let (_, w) = self.solver.solve(&a_mat, &b_mat, self.start_seed)?;
        let num = w.dot(&(&a_mat * &w));
        let den = w.dot(&(&b_mat * &w));
        if !(den > 0.0) {
            return Err(Error::IllConditioned);
        }
        let target = self.trials.class(self.class);
        let c1 = self.trials.class(1);
        let c2 = self.trials.class(2);
        let n = self.trials.n_trials();
        let mut g_a = Vec::with_capacity(n);
        let mut g_b = Vec::with_capacity(n);
        for i in 0..n {
            let qa = w.dot(&(&target[i] * &w));
            let qb = w.dot(&((&c1[i] + &c2[i]) * &w));
            g_a.push(-qa / den);
            g_b.push(num * qb / (den * den));
        }
        let a_clip: Vec<f64> = a.iter().map(|&v| v.max(0.0)).collect();
        let b_clip: Vec<f64> = b.iter().map(|&v| v.max(0.0)).collect();
        Ok((g_a, g_b, a_clip, b_clip))
    }

    /// Extracts `k` components by repeated deflation of the numerator
    /// matrix. Returns the eigenvalues (non-increasing) and a matrix whose
    /// columns are B-orthonormal weight vectors.
    pub fn extract_components(&self, x: &[f64], k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
        if k == 0 || k > self.trials.n_channels() {
            return Err(Error::InvalidConfig(
                "component count must lie in 1..=n_channels".into(),
            ));
        }
        let (a, b) = self.split(x);
        let a_hat = simplex_project(a);
        let b_hat = simplex_project(b);
        let (mut a_mat, b_mat) = self.build_pencil(&a_hat, &b_hat);
        let mut values = Vec::with_capacity(k);
        let mut columns = Vec::with_capacity(k);
        for j in 0..k {
            let seed = derive_seed(self.start_seed, &["deflate", &j.to_string()]);
            let (lambda, w) = self.solver.solve(&a_mat, &b_mat, seed)?;
            let nb = w.dot(&(&b_mat * &w)).sqrt();
            if !(nb > 0.0) || !nb.is_finite() {
                return Err(Error::IllConditioned);
            }
            let wb = w / nb;
            let bw = &b_mat * &wb;
            a_mat -= &bw * bw.transpose() * lambda;
            values.push(lambda);
            columns.push(wb);
        }
        Ok((values, DMatrix::from_columns(&columns)))
    }

    /// Black-box view over the unit box, one cost evaluation per call.
    pub fn to_problem(&self) -> Problem {
        let inst = self.clone();
        let dim = self.dim();
        Problem::new(
            format!("wcsp_class{}", self.class),
            vec![0.0; dim],
            vec![1.0; dim],
            Arc::new(move |x: &[f64]| inst.cost_flat(x)),
        )
        .expect("unit box bounds are valid")
    }

    /// Gradient-capable view for the descent optimizers. Solver failures
    /// inside the gradient come back as a zero vector, which stalls the
    /// descent step instead of poisoning it.
    pub fn to_grad_problem(&self) -> GradProblem {
        let inst = self.clone();
        let dim = self.dim();
        GradProblem::with_gradient(
            self.to_problem(),
            Arc::new(move |x: &[f64]| inst.grad_flat(x).unwrap_or_else(|_| vec![0.0; dim])),
        )
    }
}

/// Synthesizes a two-class trial set with a controllable separation.
///
/// Sources are mixed through a fixed seeded matrix with singular values in
/// [0.5, 1.5]. The first two source variances carry the class contrast:
/// class 1 scales them by `(1 + separation)` and its reciprocal, class 2
/// swaps the two. Every trial additionally jitters each source variance
/// log-uniformly, so trials differ even at zero separation.
pub fn synth_trials(
    seed: u64,
    n_trials: usize,
    n_channels: usize,
    n_samples: usize,
    class_separation: f64,
) -> Result<TrialSet> {
    if n_trials == 0 || n_channels < 2 || n_samples < 2 {
        return Err(Error::InvalidConfig(
            "need at least one trial, two channels, and two samples".into(),
        ));
    }
    if !(class_separation >= 0.0) || !class_separation.is_finite() {
        return Err(Error::InvalidConfig(
            "class separation must be non-negative".into(),
        ));
    }
    let q1 = crate::benchmarks::transform::random_rotation(
        n_channels,
        derive_seed(seed, &["wcsp", "mix1"]),
    );
    let q2 = crate::benchmarks::transform::random_rotation(
        n_channels,
        derive_seed(seed, &["wcsp", "mix2"]),
    );
    let gains = DVector::from_fn(n_channels, |i, _| {
        0.5 + i as f64 / (n_channels - 1).max(1) as f64
    });
    let mixing = &q1 * DMatrix::from_diagonal(&gains) * q2.transpose();

    let s = class_separation;
    let mut v1 = vec![1.0; n_channels];
    v1[0] = 1.0 + s;
    v1[1] = 1.0 / (1.0 + s);
    let mut v2 = vec![1.0; n_channels];
    v2[0] = 1.0 / (1.0 + s);
    v2[1] = 1.0 + s;

    let mut rng = RngStream::derived(seed, &["wcsp", "synth"]);
    let mut make_class = |profile: &[f64]| -> Result<Vec<DMatrix<f64>>> {
        (0..n_trials)
            .map(|_| {
                let scales: Vec<f64> = profile
                    .iter()
                    .map(|&v| {
                        let jitter = rng.uniform(-0.15, 0.15).expect("fixed range").exp();
                        (v * jitter).sqrt()
                    })
                    .collect();
                let z = DMatrix::from_fn(n_channels, n_samples, |r, _| scales[r] * rng.normal());
                normalized_covariance(&(&mixing * z))
            })
            .collect()
    };
    let class1 = make_class(&v1)?;
    let class2 = make_class(&v2)?;
    TrialSet::new(class1, class2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_x(n_trials: usize) -> Vec<f64> {
        vec![1.0; 2 * n_trials]
    }

    // Hand-checked: E E^T = diag(1, 4), trace 5.
    #[test]
    fn normalized_covariance_has_unit_trace() {
        let e = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let c = normalized_covariance(&e).unwrap();
        assert!((c[(0, 0)] - 0.2).abs() < 1e-15);
        assert!((c[(1, 1)] - 0.8).abs() < 1e-15);
        assert!(c[(0, 1)].abs() < 1e-15);
        assert!((c.trace() - 1.0).abs() < 1e-15);
        // All-zero windows are degenerate.
        assert!(normalized_covariance(&DMatrix::zeros(2, 4)).is_err());
    }

    #[test]
    fn simplex_projection_clips_and_renormalizes() {
        assert_eq!(simplex_project(&[0.2, 0.2]), vec![0.5, 0.5]);
        assert_eq!(simplex_project(&[-1.0, 1.0]), vec![0.0, 1.0]);
        assert_eq!(simplex_project(&[-1.0, -2.0]), vec![0.5, 0.5]);
        assert_eq!(simplex_project(&[2.0]), vec![1.0]);
    }

    #[test]
    fn trial_set_rejects_malformed_covariances() {
        let good =
            normalized_covariance(&DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 2.0])).unwrap();
        // Asymmetric.
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.0, 0.5]);
        assert!(TrialSet::new(vec![bad], vec![good.clone()]).is_err());
        // Wrong trace.
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(TrialSet::new(vec![bad], vec![good.clone()]).is_err());
        // Indefinite: eigenvalues 1.5 and -0.5.
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 1.0, 0.5]);
        assert!(TrialSet::new(vec![bad], vec![good.clone()]).is_err());
        // Mismatched trial counts.
        assert!(TrialSet::new(vec![good.clone(), good.clone()], vec![good.clone()]).is_err());
        // Empty.
        assert!(TrialSet::new(vec![], vec![]).is_err());
    }

    #[test]
    fn synth_is_deterministic_and_well_formed() {
        let t1 = synth_trials(7, 6, 8, 100, 1.0).unwrap();
        let t2 = synth_trials(7, 6, 8, 100, 1.0).unwrap();
        assert_eq!(t1, t2);
        let t3 = synth_trials(8, 6, 8, 100, 1.0).unwrap();
        assert_ne!(t1, t3);
        assert_eq!(t1.n_trials(), 6);
        assert_eq!(t1.n_channels(), 8);
    }

    #[test]
    fn zero_separation_pins_the_quotient_near_one_half() {
        // Identical class distributions make the numerator about half the
        // denominator in every direction; the maximizer only picks up
        // sampling noise.
        let trials = synth_trials(11, 12, 8, 600, 0.0).unwrap();
        let inst = WcspInstance::new(trials, 1, PencilSolver::Dense, 0).unwrap();
        let lambda = -inst.cost_flat(&uniform_x(12));
        assert!(
            lambda > 0.4 && lambda < 0.75,
            "quotient {lambda} strays from 1/2"
        );
    }

    #[test]
    fn strong_separation_lifts_the_target_quotient() {
        let trials = synth_trials(12, 12, 8, 600, 2.0).unwrap();
        let inst = WcspInstance::new(trials.clone(), 1, PencilSolver::Dense, 0).unwrap();
        let lambda = -inst.cost_flat(&uniform_x(12));
        assert!(lambda > 0.65, "quotient {lambda} is too weak");
        assert!(lambda <= 1.0 + 1e-9, "quotient {lambda} exceeds its bound");
        // The other class has the same task by symmetry.
        let inst2 = WcspInstance::new(trials, 2, PencilSolver::Dense, 0).unwrap();
        let lambda2 = -inst2.cost_flat(&uniform_x(12));
        assert!(lambda2 > 0.65, "class-2 quotient {lambda2} is too weak");
    }

    #[test]
    fn cost_is_invariant_to_weight_scaling() {
        let trials = synth_trials(13, 8, 6, 200, 1.0).unwrap();
        let inst = WcspInstance::new(trials, 1, PencilSolver::Dense, 0).unwrap();
        let mut rng = RngStream::new(5);
        let x: Vec<f64> = (0..inst.dim()).map(|_| 0.05 + 0.95 * rng.unit()).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * 0.37).collect();
        let c1 = inst.cost_flat(&x);
        let c2 = inst.cost_flat(&scaled);
        assert!((c1 - c2).abs() < 1e-12, "{c1} vs {c2}");
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let trials = synth_trials(14, 6, 6, 200, 1.0).unwrap();
        let inst = WcspInstance::new(trials, 1, PencilSolver::Dense, 0).unwrap();
        let mut rng = RngStream::new(6);
        let x: Vec<f64> = (0..inst.dim()).map(|_| 0.1 + 0.9 * rng.unit()).collect();
        let grad = inst.grad_flat(&x).unwrap();
        let h = 1e-6;
        for i in 0..x.len() {
            let mut hi = x.clone();
            let mut lo = x.clone();
            hi[i] += h;
            lo[i] -= h;
            let fd = (inst.cost_flat(&hi) - inst.cost_flat(&lo)) / (2.0 * h);
            let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-8);
            assert!(
                rel < 1e-5,
                "coordinate {i}: analytic {} vs fd {fd}",
                grad[i]
            );
        }
    }

    #[test]
    fn gradient_is_tangent_to_the_rescaling_direction() {
        // Scaling invariance forces the gradient to be orthogonal to the
        // weights themselves, block by block.
        let trials = synth_trials(15, 7, 6, 200, 1.5).unwrap();
        let inst = WcspInstance::new(trials, 2, PencilSolver::Dense, 0).unwrap();
        let mut rng = RngStream::new(7);
        let x: Vec<f64> = (0..inst.dim()).map(|_| 0.1 + 0.9 * rng.unit()).collect();
        let g = inst.grad_flat(&x).unwrap();
        let n = inst.n_trials();
        let dot_a: f64 = (0..n).map(|i| g[i] * x[i]).sum();
        let dot_b: f64 = (0..n).map(|i| g[n + i] * x[n + i]).sum();
        assert!(dot_a.abs() < 1e-10, "numerator block radial leak {dot_a}");
        assert!(dot_b.abs() < 1e-10, "denominator block radial leak {dot_b}");
    }

    #[test]
    fn deflated_components_are_b_orthonormal_eigenpairs() {
        let trials = synth_trials(16, 8, 6, 300, 1.0).unwrap();
        let inst = WcspInstance::new(trials, 1, PencilSolver::Dense, 0).unwrap();
        let x = uniform_x(8);
        let (values, w) = inst.extract_components(&x, 3).unwrap();
        assert_eq!(values.len(), 3);
        for pair in values.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "values not sorted: {values:?}");
        }
        let a_hat = simplex_project(&x[..8]);
        let b_hat = simplex_project(&x[8..]);
        let (a_mat, b_mat) = inst.build_pencil(&a_hat, &b_hat);
        let gram = w.transpose() * &b_mat * &w;
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!(
                    (gram[(r, c)] - want).abs() < 1e-8,
                    "gram[{r},{c}] = {}",
                    gram[(r, c)]
                );
            }
        }
        // Each pair still solves the original pencil.
        for j in 0..3 {
            let wj = w.column(j).into_owned();
            let resid = &a_mat * &wj - &b_mat * &wj * values[j];
            assert!(
                resid.norm() < 1e-8,
                "component {j} residual {}",
                resid.norm()
            );
        }
    }

    #[test]
    fn trial_set_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.json");
        let t = synth_trials(17, 5, 6, 150, 0.8).unwrap();
        t.save(&path).unwrap();
        let back = TrialSet::load(&path).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn loader_rejects_other_containers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"format\":\"something-else\",\"version\":1,\"n_channels\":2,\"n_trials\":0,\"class1\":[],\"class2\":[]}").unwrap();
        assert!(TrialSet::load(&path).is_err());
    }

    #[test]
    fn instance_rejects_bad_classes() {
        let t = synth_trials(18, 3, 4, 100, 0.5).unwrap();
        assert!(WcspInstance::new(t.clone(), 0, PencilSolver::Dense, 0).is_err());
        assert!(WcspInstance::new(t, 3, PencilSolver::Dense, 0).is_err());
    }

    #[test]
    fn problem_view_charges_budget_and_clamps_to_unit_box() {
        let t = synth_trials(19, 4, 4, 100, 1.0).unwrap();
        let inst = WcspInstance::new(t, 1, PencilSolver::default(), 42).unwrap();
        let p = inst.to_problem();
        assert_eq!(p.dim(), 8);
        let mut budget = crate::Budget::new(2);
        let c = p.evaluate(&mut budget, &vec![1.0; 8]).unwrap();
        assert!(c.is_finite());
        assert_eq!(budget.nfe_used(), 1);
        let clamped = p.clamp(&vec![2.0; 8]);
        assert!(clamped.iter().all(|&v| v == 1.0));
    }
}
