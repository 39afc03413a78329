//! Deterministic randomness helpers.
//!
//! Every random decision in a run is derived from the single run seed, either
//! through a [`ChaCha8Rng`] stream or through the stateless [`mix64`] hash.
//! Nothing in the crate touches OS entropy.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Stateless, stable across platforms, good enough to
/// derive tie-break digests and sub-seeds from structured inputs.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a sequence of words into one digest via repeated mixing.
pub fn mix_words(words: &[u64]) -> u64 {
    let mut acc = 0x243f_6a88_85a3_08d3; // pi fraction, arbitrary non-zero start
    for &w in words {
        acc = mix64(acc ^ w);
    }
    acc
}

/// Hash a label into the mix; used to give named components disjoint streams.
pub fn mix_label(seed: u64, label: &str) -> u64 {
    let mut acc = mix64(seed);
    for b in label.as_bytes() {
        acc = mix64(acc ^ u64::from(*b));
    }
    acc
}

/// A seeded generator for one named component of a run.
///
/// Components (block production, workload, oracle noise, ...) each derive
/// their own stream so that adding draws in one place never shifts the
/// others.
pub fn component_rng(run_seed: u64, component: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_label(run_seed, component))
}

/// Map a digest onto [0, 1) with 53 bits of precision, for stateless
/// probability draws.
pub fn unit(x: u64) -> f64 {
    (x >> 11) as f64 / (1u64 << 53) as f64
}
