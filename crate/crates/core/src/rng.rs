//! Seed handling for ensemble runs.
//!
//! Every stochastic operation takes an explicit 64-bit seed. Ensembles derive
//! per-task seeds from a master seed with a SplitMix64 step over the task
//! index, so members are independent, order-insensitive, and reproducible
//! regardless of how the ensemble is scheduled.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 output function: the documented splitting step.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed for ensemble member `index` under `master`.
pub fn split_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
