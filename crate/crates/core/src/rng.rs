//! Seed derivation for reproducible, parallel-safe random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every simulation in the crate.
pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser; a bijection on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `index` under `master`.
///
/// For a fixed master the map is a composition of bijections, so distinct
/// indices always yield distinct seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(GOLDEN_GAMMA)))
}

pub fn stream_rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for replication `index` of a study seeded with `master`.
pub fn replication_rng(master: u64, index: u64) -> StreamRng {
    stream_rng(derive_seed(master, index))
}
