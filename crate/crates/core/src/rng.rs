//! Seeded random streams.
//!
//! Every stochastic component draws from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`. Trial `t` of an experiment uses seed
//! `seed_base + t`. Streams are reproducible within a build; bit equality
//! with other languages is not a goal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_seed(seed_base: u64, trial: usize) -> u64 {
    seed_base.wrapping_add(trial as u64)
}
