//! Seeded random streams.
//!
//! Every randomized routine draws from ChaCha8, a counter-based generator:
//! the 64-bit user seed is expanded into the key and each consumer picks its
//! own stream id, so two consumers sharing a seed never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Stream ids reserved by the library.
pub mod streams {
    pub const MATRIX: u64 = 1;
    pub const MATRIX_AUX: u64 = 2;
    pub const EMBEDDING: u64 = 3;
    pub const PIVOT_ROWS: u64 = 4;
}

/// Returns the generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
