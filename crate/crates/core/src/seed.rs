//! Seed derivation shared by every randomized routine.
//!
//! All randomness is a pure function of 64-bit stream seeds, so results do
//! not depend on how work is split across threads. The mixing functions are
//! part of the external interface and documented in `docs/SEEDING.md`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function applied to `z + GOLDEN_GAMMA`.
#[inline]
pub fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a, used to fold task names into seeds.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed of a named task under a master seed.
pub fn task_seed(master: u64, task: &str) -> u64 {
    mix64(master ^ fnv1a64(task.as_bytes()))
}

/// Seed of the `index`-th independent substream of `seed`.
#[inline]
pub fn substream(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index))
}

/// Uniform in [0, 1) attached to `edge` on the tape identified by `stream`.
///
/// Thresholding these at `p` gives Bernoulli(p) edges, and the same tape at
/// two values p1 <= p2 gives nested edge sets.
#[inline]
pub fn edge_uniform(stream: u64, edge: usize) -> f64 {
    let bits = mix64(stream ^ mix64(edge as u64)) >> 11;
    bits as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential generator for a stream: ChaCha8 seeded through `seed_from_u64`.
pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream)
}
