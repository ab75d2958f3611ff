//! Per-replicate random streams.
//!
//! Every stream is keyed by `mix64(master_seed, index)`, so replicate `k`
//! draws the same numbers no matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Tags that separate independent uses of one replicate seed.
pub mod tag {
    pub const GRAPH: u64 = 0x6772_6170_6800_0000;
    pub const OPTIMIZER: u64 = 0x6f70_7469_6d00_0000;
    pub const SIZE: u64 = 0x7369_7a65_0000_0000;
}

#[inline]
fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a stream index (SplitMix64 finalizer over
/// `master + (index + 1) * golden_gamma`).
#[inline]
pub fn mix64(master: u64, index: u64) -> u64 {
    splitmix64_finalize(master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub fn stream_rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
