//! Counter-derived random streams: one seed, independent stream per index, so
//! results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Named sub-stream: mixes a label into the seed before deriving streams.
pub fn named(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mixed = label
        .bytes()
        .fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    stream(mixed, index)
}
