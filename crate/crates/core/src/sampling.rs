//! Reproducible sample placement.
//!
//! Points come from a Halton sequence with a seeded Cranley–Patterson
//! shift. Everything random that is attached to a sample (frames,
//! directions, probes) draws from a ChaCha stream keyed by
//! `(seed, stream, index)`, so results do not depend on how work is split
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Independent stream identifiers, so that e.g. `x` points and `y` points
/// drawn with the same seed differ.
pub mod streams {
    pub const OMEGA: u64 = 1;
    pub const LAMBDA: u64 = 2;
    pub const FRAMES: u64 = 3;
    pub const PROBES: u64 = 4;
    pub const CONFIGS: u64 = 5;
    pub const AUX: u64 = 6;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic RNG for one sample of one stream.
pub fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(seed ^ splitmix(stream)) ^ index))
}

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % b) as f64;
        index /= b;
        f *= inv;
    }
    r
}

/// Shifted Halton sequence in `[0,1)^dim`.
#[derive(Clone, Debug)]
pub struct Halton {
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64, stream: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton sequence supports up to {} dimensions", PRIMES.len());
        let mut rng = rng_for(seed, stream, u64::MAX);
        Self { shift: (0..dim).map(|_| rng.random::<f64>()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// The `index`-th point (index 0 is skipped internally).
    pub fn point(&self, index: u64) -> Vec<f64> {
        self.shift
            .iter()
            .zip(PRIMES)
            .map(|(&s, p)| {
                let v = radical_inverse(index + 1, p) + s;
                v - v.floor()
            })
            .collect()
    }
}

/// Uniform direction in `R^n`.
pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len > 1e-8 {
            return v.into_iter().map(|a| a / len).collect();
        }
    }
}

/// Uniform point of `[lo, hi]`.
pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
