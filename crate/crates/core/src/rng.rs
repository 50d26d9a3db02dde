//! Seeded random streams.
//!
//! Every stochastic component draws from ChaCha8 seeded with the master seed
//! and a distinct stream number, so that runs are reproducible and the streams
//! used by different components never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream numbers reserved for the individual components.
pub mod streams {
    pub const DISORDER: u64 = 1;
    pub const INITIAL: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const PERTURBATION: u64 = 4;
    pub const CALIBRATION: u64 = 5;
}

pub fn stream(master: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Master seed of replica `index` (disorder sample or noise repetition)
/// derived from a parent seed.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}
