//! Seeded Gaussian noise.
//!
//! ChaCha8 keyed by a 64-bit seed; normal variates come from the ziggurat
//! transform of `rand_distr::StandardNormal`. Ensemble members get their
//! seeds from the master seed through SplitMix64, so any member can be
//! regenerated on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Recorded in every fingerprint so a record names the generator that made it.
pub const RNG_ALGORITHM: &str = "chacha8(rand_chacha 0.9)+ziggurat(rand_distr 0.5 StandardNormal)";

pub struct GaussianSource {
    rng: ChaCha8Rng,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Seed of ensemble member `index` derived from `master` (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
