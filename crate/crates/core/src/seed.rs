//! Seed derivation for reproducible Monte-Carlo runs.
//!
//! Every random quantity in the workspace is drawn from a ChaCha stream whose
//! seed is derived here. Identical root seeds therefore reproduce identical
//! outputs byte for byte, and trials may run in any order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer, used as a cheap stable mixing function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one Monte-Carlo trial: root seed XOR a hash of (sweep, trial).
pub fn trial_seed(root: u64, sweep_index: u64, trial_index: u64) -> u64 {
    root ^ splitmix64(splitmix64(sweep_index).wrapping_add(trial_index))
}

/// Independent sub-stream seed, e.g. one per scheme within a trial.
pub fn stream_seed(base: u64, tag: u64) -> u64 {
    splitmix64(base ^ splitmix64(tag.wrapping_mul(0xA24B_AED4_963E_E407)))
}

/// Deterministic generator for a given seed.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
