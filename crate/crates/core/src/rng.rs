//! Seed derivation and the deterministic pseudorandom streams used by
//! samplers and dithered controllers.
//!
//! Every Monte-Carlo trial draws from its own generator, seeded by
//! [`derive_seed`]`(base_seed, trial_index)`. Results therefore depend only
//! on the base seed and the trial index, never on how trials are scheduled
//! across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: `mix64(base + (index + 1) * golden_gamma) ^ mix64(index)`.
#[inline]
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))) ^ mix64(index)
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform value in `[0, 1)` keyed by `(seed, a, b)` without any generator state.
#[inline]
pub fn keyed_uniform(seed: u64, a: u64, b: u64) -> f64 {
    let h = mix64(derive_seed(derive_seed(seed, a), b));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
