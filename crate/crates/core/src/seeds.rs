//! Deterministic seed derivation.
//!
//! Every randomized routine takes a single `u64` seed and derives independent
//! streams from it, so reruns with the same seed reproduce results bit for bit
//! while trials, noise draws, and sampling stay decorrelated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche, cheap, stable.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for sub-stream `stream` of `base`.
pub fn derive(base: u64, stream: u64) -> u64 {
    mix(base ^ mix(stream))
}

/// Counter-based RNG for (`seed`, `stream`).
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
