//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is drawn from a `ChaCha8Rng` seeded by
//! mixing a base seed with a short path of integers (transmitter id, frame
//! index, epoch ...). Mixing is SplitMix64, so nearby inputs give unrelated
//! streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `base` with each element of `path` in order.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, path))
}

/// Domain tags keep independent streams apart when they share a base seed.
pub mod tag {
    pub const PROFILE: u64 = 0x5052_4f46;
    pub const FRAME: u64 = 0x4652_414d;
    pub const COUNT: u64 = 0x434e_5421;
    pub const PARTITION: u64 = 0x5041_5254;
    pub const SPLIT: u64 = 0x5350_4c54;
    pub const AUGMENT: u64 = 0x4155_474d;
    pub const INIT: u64 = 0x494e_4954;
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const REALIZATION: u64 = 0x5245_414c;
    pub const TRAIN: u64 = 0x5452_4e21;
    pub const RESAMPLE: u64 = 0x5253_4d50;
}
