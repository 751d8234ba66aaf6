//! Seeded random streams.
//!
//! One master seed fans out into independent named streams so that turning a
//! pipeline stage on or off never shifts the draws seen by the other stages.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 1,
    Batching = 2,
    Augmentation = 3,
    Splits = 4,
    Labeling = 5,
    Contamination = 6,
    Synthesis = 7,
}

pub fn stream(seed: u64, stream: Stream) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Derives the seed for cell `index` of a larger experiment from a master seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x5eed_0000 + index);
    rng.next_u64()
}
