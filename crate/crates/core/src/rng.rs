//! The single random source of the crate.
//!
//! Every random decision (graph sampling, partition shuffles, adversary
//! moves) draws from [`GameRng`], which is `ChaCha8Rng` seeded through
//! `SeedableRng::seed_from_u64`. ChaCha8 has a fixed, published output
//! stream, so a run is reproducible from its seeds on any platform and from
//! any language that implements the same generator.
//!
//! Independent streams are derived from a master seed with [`derive_seed`]
//! (one SplitMix64 step over `seed ^ tag`), never by sharing a generator.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The named, portable generator used everywhere in the crate.
pub type GameRng = ChaCha8Rng;

/// Stream tags for [`derive_seed`].
pub mod stream {
    pub const PARTITION: u64 = 0x7061_7274_6974_696f;
    pub const ADVERSARY: u64 = 0x6164_7665_7273_6172;
    pub const HAMILTON: u64 = 0x6861_6d69_6c74_6f6e;
}

pub fn rng_from_seed(seed: u64) -> GameRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer applied to `seed ^ tag`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = (seed ^ tag).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bernoulli trial with the exact recipe used by graph sampling: take the
/// top 53 bits of one `next_u64` and compare `x * 2^-53 < p`.
pub fn bernoulli(rng: &mut GameRng, p: f64) -> bool {
    let x = rng.next_u64() >> 11;
    (x as f64) * (1.0 / (1u64 << 53) as f64) < p
}

/// Uniform index in `0..len` (`len > 0`).
pub fn index(rng: &mut GameRng, len: usize) -> usize {
    rng.gen_range(0..len)
}

pub fn shuffle<T>(rng: &mut GameRng, items: &mut [T]) {
    use rand::seq::SliceRandom;
    items.shuffle(rng);
}
