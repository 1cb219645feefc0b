//! Named, seed-derived random streams.
//!
//! Every component draws from `stream(seed, name, index)` so that changing
//! one component's consumption never shifts another's randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed, a stream name and an index into a child seed.
pub fn derive_seed(seed: u64, name: &str, index: u64) -> u64 {
    let mut h = splitmix64(seed);
    for b in name.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn stream(seed: u64, name: &str, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, name, index))
}
