//! Seed derivation.
//!
//! All randomness flows from 64-bit seeds. Child seeds are derived with a
//! counter-based SplitMix64 mix so that stream `i` of master seed `m` is a pure
//! function of `(m, i)`, independent of evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Named streams so that e.g. delay draws and noise seeds never collide.
pub mod stream {
    pub const NOISE: u64 = 0x6e6f_6973_6500_0000;
    pub const DELAY: u64 = 0x6465_6c61_7900_0000;
    pub const REPLICATION: u64 = 0x7265_706c_0000_0000;
    pub const INIT: u64 = 0x696e_6974_0000_0000;
    pub const THREADED: u64 = 0x7468_7264_0000_0000;
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of child `index` within `stream` of `master`.
#[inline]
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let base = mix64(master.wrapping_add(GOLDEN_GAMMA).wrapping_add(mix64(stream)));
    mix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}
