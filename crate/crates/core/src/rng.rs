//! Seed fan-out.
//!
//! Every random quantity is drawn from a ChaCha8 stream whose seed is derived
//! from one master seed and a purpose tag, so that e.g. the two graphs of a
//! replicate never share a stream and adding a new consumer does not perturb
//! existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const LATENTS: u64 = 0x4c41_5445_4e54;
pub const GRAPH1: u64 = 0x4752_4150_4831;
pub const GRAPH2: u64 = 0x4752_4150_4832;
pub const ASSIGNMENTS: u64 = 0x4153_5349_474e;
pub const CANDIDATES: u64 = 0x4341_4e44_4944;
pub const LANCZOS: u64 = 0x4c41_4e43_5a4f;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of the stream identified by `tag` under `master`.
pub fn derive(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag))
}

pub fn stream(master: u64, tag: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive(master, tag))
}

/// Seed for the comparison of snapshots `i` and `j` (order-insensitive).
pub fn pair_seed(master: u64, i: usize, j: usize) -> u64 {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    derive(derive(master, a as u64), (b as u64) ^ 0x5041_4952)
}
