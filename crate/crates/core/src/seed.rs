//! Deterministic seed splitting.
//!
//! Every parallel unit of work (trajectory chunk, bootstrap resample, curve
//! point, objective evaluation) draws from its own generator seeded with
//! `derive(root, stream)`. The derivation is a SplitMix64 finalizer applied to
//! `root + (stream + 1) * 0x9E3779B97F4A7C15`, so streams are decorrelated and
//! results never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(root: u64, stream: u64) -> u64 {
    splitmix64(root.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn rng(root: u64, stream: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(derive(root, stream))
}
