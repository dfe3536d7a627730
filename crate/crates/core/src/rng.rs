//! Deterministic random streams.
//!
//! Every consumer of randomness draws from its own ChaCha stream derived from
//! the master seed, so adding draws in one place never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Placement = 1,
    Replacement = 2,
    Sampling = 3,
    Init = 4,
    Minibatch = 5,
    Baseline = 6,
    Episode = 7,
}

/// Independent stream for `(purpose, index)` under `seed`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) ^ index);
    rng
}

/// Derives a child seed, e.g. one world seed per episode.
pub fn derive_seed(seed: u64, purpose: Purpose, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, purpose, index).next_u64()
}
