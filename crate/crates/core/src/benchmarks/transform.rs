//! Seeded orthogonal rotations and shift/scale composition.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::rng::RngStream;
use crate::{Error, Problem, Result};

/// Draws a random orthogonal matrix (determinant +1 or -1) from a seeded
/// Gaussian matrix via QR, with the sign of R's diagonal fixed so the
/// distribution does not collapse.
pub fn random_rotation(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = RngStream::new(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.normal());
    let qr = g.qr();
    let r_diag: Vec<f64> = (0..dim).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (j, d) in r_diag.iter().enumerate() {
        if *d < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Input-space transform applied before a base objective:
/// `z = R * (input_scale * (x - shift))`, plus `output_bias` on the result.
#[derive(Clone)]
pub struct Transform {
    pub rotation: Option<DMatrix<f64>>,
    pub shift: Option<Vec<f64>>,
    pub input_scale: f64,
    pub output_bias: f64,
}

impl Transform {
    pub fn identity() -> Self {
        Transform {
            rotation: None,
            shift: None,
            input_scale: 1.0,
            output_bias: 0.0,
        }
    }
}

/// Wraps a problem in a transform. The box is unchanged; the known optimum
/// relocates to `shift + R^T z* / input_scale` where `z*` is the base
/// optimum, and its value gains `output_bias`.
pub fn apply_transform(base: &Problem, t: &Transform) -> Result<Problem> {
    let dim = base.dim();
    if let Some(r) = &t.rotation {
        if r.nrows() != dim || r.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.nrows(),
            });
        }
    }
    if let Some(s) = &t.shift {
        if s.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
    }
    if !(t.input_scale.is_finite() && t.input_scale != 0.0) {
        return Err(Error::InvalidConfig(
            "input_scale must be finite and nonzero".into(),
        ));
    }

    let base_cost = base.cost_fn();
    let rotation = t.rotation.clone();
    let shift = t.shift.clone();
    let scale = t.input_scale;
    let bias = t.output_bias;

    let cost = Arc::new(move |x: &[f64]| {
        let mut z: Vec<f64> = match &shift {
            Some(s) => x
                .iter()
                .zip(s)
                .map(|(&xi, &si)| scale * (xi - si))
                .collect(),
            None => x.iter().map(|&xi| scale * xi).collect(),
        };
        if let Some(r) = &rotation {
            let v = r * DVector::from_column_slice(&z);
            z = v.iter().copied().collect();
        }
        base_cost(&z) + bias
    });

    let mut out = Problem::new(
        base.name().to_string(),
        base.lower().to_vec(),
        base.upper().to_vec(),
        cost,
    )?;

    if let Some((zstar, fstar)) = base.known_optimum() {
        // Invert the input map: x* = shift + R^T z* / scale.
        let mut x: Vec<f64> = match &t.rotation {
            Some(r) => {
                let v = r.transpose() * DVector::from_column_slice(zstar);
                v.iter().map(|&c| c / t.input_scale).collect()
            }
            None => zstar.iter().map(|&c| c / t.input_scale).collect(),
        };
        if let Some(s) = &t.shift {
            for (xi, si) in x.iter_mut().zip(s) {
                *xi += si;
            }
        }
        out = out.with_known_optimum(x, fstar + t.output_bias);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::functions;

    fn rastrigin_problem(dim: usize) -> Problem {
        Problem::new(
            "rastrigin",
            vec![-5.12; dim],
            vec![5.12; dim],
            Arc::new(functions::rastrigin),
        )
        .unwrap()
        .with_known_optimum(vec![0.0; dim], 0.0)
    }

    #[test]
    fn rotation_is_orthogonal_and_deterministic() {
        for dim in [2, 3, 8] {
            let r = random_rotation(dim, 99);
            let should_be_identity = &r * r.transpose();
            for i in 0..dim {
                for j in 0..dim {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (should_be_identity[(i, j)] - want).abs() < 1e-10,
                        "R R^T deviates at ({i},{j})"
                    );
                }
            }
            let again = random_rotation(dim, 99);
            assert_eq!(r, again);
            assert_ne!(r, random_rotation(dim, 100));
        }
    }

    #[test]
    fn rotation_preserves_norms() {
        let r = random_rotation(5, 3);
        let mut rng = RngStream::new(4);
        for _ in 0..50 {
            let x = DVector::from_fn(5, |_, _| rng.normal());
            let y = &r * &x;
            assert!((x.norm() - y.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_transform_is_a_no_op() {
        let base = rastrigin_problem(3);
        let t = apply_transform(&base, &Transform::identity()).unwrap();
        let mut rng = RngStream::new(8);
        for _ in 0..100 {
            let x = rng.point_in_box(base.lower(), base.upper());
            assert_eq!(base.raw_cost(&x), t.raw_cost(&x));
        }
        let (loc, val) = t.known_optimum().unwrap();
        assert_eq!(loc, &[0.0, 0.0, 0.0]);
        assert_eq!(val, 0.0);
    }

    #[test]
    fn shift_relocates_the_optimum() {
        let base = rastrigin_problem(3);
        let shift = vec![1.25, -0.5, 2.0];
        let t = Transform {
            rotation: None,
            shift: Some(shift.clone()),
            input_scale: 1.0,
            output_bias: 0.75,
        };
        let p = apply_transform(&base, &t).unwrap();
        let (loc, val) = p.known_optimum().unwrap();
        assert_eq!(loc, shift.as_slice());
        assert_eq!(val, 0.75);
        assert!((p.raw_cost(&shift) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rotation_fixes_the_origin() {
        let base = rastrigin_problem(4);
        let t = Transform {
            rotation: Some(random_rotation(4, 17)),
            shift: None,
            input_scale: 1.0,
            output_bias: 0.0,
        };
        let p = apply_transform(&base, &t).unwrap();
        assert!(p.raw_cost(&[0.0; 4]).abs() < 1e-12);
    }

    #[test]
    fn scaled_rotated_optimum_lands_where_computed() {
        // Nonzero base optimum pushed through scale and rotation.
        let base = Problem::new(
            "schwefel",
            vec![-500.0; 3],
            vec![500.0; 3],
            Arc::new(functions::schwefel),
        )
        .unwrap()
        .with_known_optimum(vec![functions::SCHWEFEL_OPT; 3], 0.0);
        let t = Transform {
            rotation: Some(random_rotation(3, 21)),
            shift: None,
            input_scale: 6.0,
            output_bias: 0.0,
        };
        let p = apply_transform(&base, &t).unwrap();
        let (loc, _) = p.known_optimum().unwrap();
        let v = p.raw_cost(loc);
        assert!(v.abs() < 1e-3, "value at relocated optimum: {v}");
        assert!(p.contains(loc));
    }

    #[test]
    fn transform_dimension_checks() {
        let base = rastrigin_problem(3);
        let bad_rot = Transform {
            rotation: Some(random_rotation(4, 1)),
            shift: None,
            input_scale: 1.0,
            output_bias: 0.0,
        };
        assert!(apply_transform(&base, &bad_rot).is_err());
        let bad_shift = Transform {
            rotation: None,
            shift: Some(vec![0.0; 2]),
            input_scale: 1.0,
            output_bias: 0.0,
        };
        assert!(apply_transform(&base, &bad_shift).is_err());
    }
}
