//! Seed derivation.
//!
//! Every random quantity is drawn from its own ChaCha8 stream whose seed is a
//! pure function of the master seed and a path of integer labels
//! (realization, purpose, user, ...). The labels are folded through the
//! SplitMix64 finalizer, so a worker computing realization 17 obtains exactly
//! the numbers a serial loop would, independent of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose labels for the substreams of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Geometry = 1,
    SpecularPhases = 2,
    Diffuse = 3,
    Innovation = 4,
    TrainingNoise = 5,
    Redraw = 6,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a label path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

/// Seed of realization `index` under master seed `master`.
pub fn realization_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, &[0x5245_414c, index as u64])
}

/// RNG for `(purpose, user)` within the realization seeded by `seed`.
pub fn substream(seed: u64, purpose: Stream, user: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[purpose as u64, user as u64]))
}
