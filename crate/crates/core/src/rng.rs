//! Deterministic RNG stream derivation.
//!
//! All randomness in the crate flows from a single 64-bit seed. Substreams are
//! derived from `(seed, component label, index)` so that any piece of work
//! (one source vertex, one Monte Carlo slot, one replication) owns an
//! independent generator regardless of thread scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function. Bijective on u64.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives the 64-bit key for a named component of a run.
pub fn component_key(seed: u64, component: &str) -> u64 {
    splitmix64(seed ^ fnv1a(component))
}

/// Generator for item `index` of the given component.
pub fn stream(seed: u64, component: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(component_key(seed, component));
    rng.set_stream(index);
    rng
}

/// Generator for a two-level index, e.g. `(level, slot)`.
pub fn stream2(seed: u64, component: &str, major: u64, minor: u64) -> ChaCha8Rng {
    let key = splitmix64(component_key(seed, component) ^ major);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(minor);
    rng
}
