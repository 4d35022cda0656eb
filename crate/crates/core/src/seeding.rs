//! Counter-based seed derivation.
//!
//! Every random stream in a sweep is keyed by a path of integers
//! (master seed, dataset index, level, repeat, ...). Streams never share
//! state, so any cell can be recomputed in isolation and the result does
//! not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SweepRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `path` into `seed`, one component at a time.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed.wrapping_add(GOLDEN)), |acc, &part| {
        mix64(acc ^ mix64(part.wrapping_add(GOLDEN)))
    })
}

pub fn rng_for(seed: u64, path: &[u64]) -> SweepRng {
    SweepRng::seed_from_u64(derive_seed(seed, path))
}

pub fn rng_from_seed(seed: u64) -> SweepRng {
    SweepRng::seed_from_u64(seed)
}
