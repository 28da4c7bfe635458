//! Seed derivation. Every random stream in an audit is keyed by
//! `(master seed, purpose, index)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Purpose tags for derived streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Trial = 1,
    Kappa = 2,
    Canaries = 3,
    Offsets = 4,
    InitSeen = 5,
    InitUnseen = 6,
    Shots = 7,
    Replication = 8,
    Data = 9,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix64(splitmix64(parent ^ splitmix64(purpose as u64)) ^ index)
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_stream(parent: u64, purpose: Purpose, index: u64) -> Stream {
    stream(derive_seed(parent, purpose, index))
}
