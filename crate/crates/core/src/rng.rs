//! Reproducible random streams.
//!
//! All randomness in the crate flows through [`RngStream`], a ChaCha8 stream
//! cipher generator. ChaCha8 is fully specified, so a seed produces the same
//! draw sequence on every platform and toolchain. Experiment cells derive
//! their seeds with [`derive_seed`], a pure function of the master seed and
//! the cell's identifying strings; adding a new cell never perturbs the
//! seeds of existing ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// SplitMix64 mixing step. Used only for seed derivation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// FNV-1a over the bytes of a tag string.
fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derives a child seed from a master seed and an ordered list of tags.
///
/// The result depends on every tag and on tag order, nothing else.
pub fn derive_seed(master: u64, tags: &[&str]) -> u64 {
    let mut h = splitmix64(master);
    for tag in tags {
        h = splitmix64(h ^ fnv1a64(tag));
    }
    h
}

/// A seeded random stream. One stream per optimizer run.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    /// Stream for one cell of a seeded experiment.
    pub fn derived(master: u64, tags: &[&str]) -> Self {
        RngStream::new(derive_seed(master, tags))
    }

    /// The seed this stream was constructed with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[lo, hi)`. `lo == hi` returns `lo`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        if lo == hi {
            return Ok(lo);
        }
        Ok(self.rng.gen_range(lo..hi))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.gen_range(0.0..1.0)
    }

    /// Uniform index in `[0, n)`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.rng.gen_range(0..n)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }

    /// Uniform point inside an axis-aligned box.
    pub fn point_in_box(&mut self, lower: &[f64], upper: &[f64]) -> Vec<f64> {
        lower
            .iter()
            .zip(upper)
            .map(|(&lo, &hi)| {
                if lo == hi {
                    lo
                } else {
                    self.rng.gen_range(lo..hi)
                }
            })
            .collect()
    }
}
