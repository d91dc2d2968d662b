//! Seeded randomness.
//!
//! A single master seed fans out into independent ChaCha streams, one per
//! consumer, so adding draws in one place never shifts another consumer's
//! sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Substream {
    Placement = 1,
    Traffic = 2,
    Fading = 3,
    Interference = 4,
    Exploration = 5,
    Sampling = 6,
    NetworkInit = 7,
}

pub fn substream(master: u64, which: Substream) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(which as u64);
    rng
}

/// Seed of the environment used in training episode `episode`.
pub fn episode_seed(master: u64, episode: u64) -> u64 {
    splitmix64(master ^ splitmix64(episode.wrapping_add(0x5eed)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
