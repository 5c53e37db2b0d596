//! Seed derivation.
//!
//! Every sampler owns one `ChaCha8Rng` seeded with `seed_from_u64`. Child
//! seeds are derived from a master seed, a purpose tag and an index:
//!
//! ```text
//! tag_hash = FNV-1a-64(tag bytes)
//! seed     = splitmix64(splitmix64(master ^ tag_hash) ^ index)
//! ```
//!
//! Derivation is a pure function of its inputs, so trial `k` keeps its seed
//! when the trial count grows and parallel runs match sequential ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every sampler in this crate.
pub type SamplerRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SamplerRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(tag.as_bytes())) ^ index)
}
