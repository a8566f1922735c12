//! Seed splitting.
//!
//! One 64-bit seed drives every random draw. Each consumer gets its own
//! ChaCha stream, so adding draws in one place never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids. Planted cluster `i` uses `PLANTED_BASE + i`.
pub mod stream {
    pub const KMEANS: u64 = 1;
    pub const SYNTH_OBSERVERS: u64 = 2;
    pub const SYNTH_BACKGROUND: u64 = 3;
    pub const SYNTH_CENTERS: u64 = 4;
    pub const PLANTED_BASE: u64 = 1 << 32;
}

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
