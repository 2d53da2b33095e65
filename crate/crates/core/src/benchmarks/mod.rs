//! Benchmark catalog: F1..F20.
//!
//! F1..F11 are the classic closed forms; F12..F16 add a seeded rotation
//! (some with an input scale); F17..F20 add a seeded shift as well. The
//! transform seeds are derived from a single catalog seed so a whole
//! experiment reproduces from one number.

pub mod functions;
pub mod transform;

use serde::Serialize;

use crate::rng::{derive_seed, RngStream};
use crate::{Error, Problem, Result};
use functions as f;
use transform::{apply_transform, random_rotation, Transform};

/// Catalog seed used when a caller does not supply one.
pub const DEFAULT_TRANSFORM_SEED: u64 = 42;

/// Fraction of the box, centered, from which shift vectors are drawn.
const SHIFT_SPAN: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DimRule {
    /// Any dimension of at least 2.
    AnyAtLeast2,
    /// Defined for exactly two coordinates.
    Exactly2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Base {
    Rosenbrock,
    Sphere,
    DixonPrice,
    Beale,
    Easom,
    Quartic,
    Schwefel,
    Weierstrass,
    Rastrigin,
    Ackley,
    Griewank,
    ExpandedScaffer,
}

impl Base {
    fn cost(self) -> fn(&[f64]) -> f64 {
        match self {
            Base::Rosenbrock => f::rosenbrock,
            Base::Sphere => f::sphere,
            Base::DixonPrice => f::dixon_price,
            Base::Beale => f::beale,
            Base::Easom => f::easom,
            Base::Quartic => f::quartic,
            Base::Schwefel => f::schwefel,
            Base::Weierstrass => f::weierstrass_default,
            Base::Rastrigin => f::rastrigin,
            Base::Ackley => f::ackley,
            Base::Griewank => f::griewank,
            Base::ExpandedScaffer => f::expanded_scaffer,
        }
    }

    /// Location of the documented optimum in the base coordinate system.
    fn optimum(self, dim: usize) -> Vec<f64> {
        match self {
            Base::Rosenbrock => vec![1.0; dim],
            Base::DixonPrice => f::dixon_price_optimum(dim),
            Base::Beale => vec![3.0, 0.5],
            Base::Schwefel => vec![f::SCHWEFEL_OPT; dim],
            _ => vec![0.0; dim],
        }
    }
}

struct Entry {
    name: &'static str,
    base: Base,
    lower: f64,
    upper: f64,
    dim_rule: DimRule,
    rotated: bool,
    shifted: bool,
    input_scale: f64,
    note: Option<&'static str>,
}

const CATALOG: [Entry; 20] = [
    Entry { name: "Rosenbrock", base: Base::Rosenbrock, lower: -100.0, upper: 100.0, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "Sphere", base: Base::Sphere, lower: -5.12, upper: 5.12, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "DixonPrice", base: Base::DixonPrice, lower: -10.0, upper: 10.0, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "Beale", base: Base::Beale, lower: -4.5, upper: 4.5, dim_rule: DimRule::Exactly2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "Easom", base: Base::Easom, lower: -100.0, upper: 100.0, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: Some("documented optimum is the origin value ~0; the surface's true peak of depth 1 sits at (pi,..,pi); dims above 2 use the product form") },
    Entry { name: "Quartic", base: Base::Quartic, lower: -1.28, upper: 1.28, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "Schwefel", base: Base::Schwefel, lower: -500.0, upper: 500.0, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "Weierstrass", base: Base::Weierstrass, lower: -0.5, upper: 0.5, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "Rastrigin", base: Base::Rastrigin, lower: -5.12, upper: 5.12, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "Ackley", base: Base::Ackley, lower: -32.768, upper: 32.768, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "Griewank", base: Base::Griewank, lower: -600.0, upper: 600.0, dim_rule: DimRule::AnyAtLeast2, rotated: false, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "RotatedAckley", base: Base::Ackley, lower: -32.768, upper: 32.768, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: false, input_scale: 1.0, note: None },
    Entry { name: "RotatedRastrigin", base: Base::Rastrigin, lower: -5.12, upper: 5.12, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: false, input_scale: 0.0512, note: None },
    Entry { name: "RotatedSchwefel", base: Base::Schwefel, lower: -500.0, upper: 500.0, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: false, input_scale: 6.0, note: None },
    Entry { name: "RotatedGriewank", base: Base::Griewank, lower: -600.0, upper: 600.0, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: false, input_scale: 6.0, note: None },
    Entry { name: "RotatedWeierstrass", base: Base::Weierstrass, lower: -0.5, upper: 0.5, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: false, input_scale: 0.005, note: None },
    Entry { name: "RotateShiftScaffer", base: Base::ExpandedScaffer, lower: -100.0, upper: 100.0, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: true, input_scale: 1.0, note: None },
    Entry { name: "RotateShiftGriewank", base: Base::Griewank, lower: -600.0, upper: 600.0, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: true, input_scale: 6.0, note: None },
    Entry { name: "RotateShiftRastrigin", base: Base::Rastrigin, lower: -5.12, upper: 5.12, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: true, input_scale: 1.0, note: None },
    Entry { name: "RotateShiftAckley", base: Base::Ackley, lower: -32.768, upper: 32.768, dim_rule: DimRule::AnyAtLeast2, rotated: true, shifted: true, input_scale: 1.0, note: None },
];

/// Identifier of a catalog entry. Index and name map one-to-one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BenchmarkId {
    index: u8,
}

impl BenchmarkId {
    /// From a 1-based index (F1..F20).
    pub fn from_index(index: u8) -> Result<Self> {
        if (1..=20).contains(&index) {
            Ok(BenchmarkId { index })
        } else {
            Err(Error::UnknownBenchmark(format!("F{index}")))
        }
    }

    /// Accepts "F7", "f7", "7", or a catalog name such as "Schwefel"
    /// (case-insensitive).
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t
            .strip_prefix('F')
            .or_else(|| t.strip_prefix('f'))
            .unwrap_or(t);
        if let Ok(n) = digits.parse::<u8>() {
            return BenchmarkId::from_index(n);
        }
        for (i, e) in CATALOG.iter().enumerate() {
            if e.name.eq_ignore_ascii_case(t) {
                return BenchmarkId::from_index((i + 1) as u8);
            }
        }
        Err(Error::UnknownBenchmark(s.to_string()))
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn name(&self) -> &'static str {
        CATALOG[self.index as usize - 1].name
    }

    /// Short form, "F1".."F20".
    pub fn label(&self) -> String {
        format!("F{}", self.index)
    }

    pub fn all() -> impl Iterator<Item = BenchmarkId> {
        (1..=20).map(|i| BenchmarkId { index: i })
    }

    fn entry(&self) -> &'static Entry {
        &CATALOG[self.index as usize - 1]
    }
}

/// Serializable catalog row for the registry dump.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkDescriptor {
    pub index: u8,
    pub label: String,
    pub name: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub dim_rule: DimRule,
    pub rotated: bool,
    pub shifted: bool,
    pub input_scale: f64,
    pub optimum_value: f64,
    pub transform_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

/// Full catalog listing with the transform seeds a given catalog seed
/// implies.
pub fn registry(seed: u64) -> Vec<BenchmarkDescriptor> {
    BenchmarkId::all()
        .map(|id| {
            let e = id.entry();
            BenchmarkDescriptor {
                index: id.index(),
                label: id.label(),
                name: e.name,
                lower: e.lower,
                upper: e.upper,
                dim_rule: e.dim_rule,
                rotated: e.rotated,
                shifted: e.shifted,
                input_scale: e.input_scale,
                optimum_value: 0.0,
                transform_seed: if e.rotated || e.shifted {
                    Some(derive_seed(seed, &["bench", e.name]))
                } else {
                    None
                },
                note: e.note,
            }
        })
        .collect()
}

/// Instantiates a catalog entry at a dimension.
///
/// `seed` fixes the rotation and shift of the transformed entries; plain
/// entries ignore it. The returned problem carries the documented optimum,
/// relocated through the transform.
pub fn make_benchmark(id: BenchmarkId, dim: usize, seed: u64) -> Result<Problem> {
    let e = id.entry();
    match e.dim_rule {
        DimRule::Exactly2 if dim != 2 => {
            return Err(Error::UnsupportedDim {
                name: e.name.to_string(),
                dim,
            });
        }
        _ if dim < 2 => {
            return Err(Error::UnsupportedDim {
                name: e.name.to_string(),
                dim,
            });
        }
        _ => {}
    }

    let base = Problem::new(
        format!("{}:{}", id.label(), e.name),
        vec![e.lower; dim],
        vec![e.upper; dim],
        std::sync::Arc::new(e.base.cost()),
    )?
    .with_known_optimum(e.base.optimum(dim), 0.0);

    if !e.rotated && !e.shifted && e.input_scale == 1.0 {
        return Ok(base);
    }

    let tseed = derive_seed(seed, &["bench", e.name]);
    let rotation = e
        .rotated
        .then(|| random_rotation(dim, derive_seed(tseed, &["rot"])));
    let shift = e.shifted.then(|| {
        let mut rng = RngStream::new(derive_seed(tseed, &["shift"]));
        let half = SHIFT_SPAN / 2.0 * (e.upper - e.lower);
        let mid = (e.upper + e.lower) / 2.0;
        (0..dim)
            .map(|_| rng.uniform(mid - half, mid + half).expect("valid range"))
            .collect::<Vec<f64>>()
    });

    apply_transform(
        &base,
        &Transform {
            rotation,
            shift,
            input_scale: e.input_scale,
            output_bias: 0.0,
        },
    )
}
