//! Seeded randomness.
//!
//! All sampling goes through ChaCha8, a counter-based stream cipher generator:
//! a 64-bit seed selects the key and an independent 64-bit stream id selects a
//! substream, so item `j` of an ensemble can be regenerated without drawing
//! items `0..j`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

pub type SeededRng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a seed with a path of indices (splitmix64 finalizer per step).
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &k| {
        mix(acc ^ mix(k.wrapping_add(0x9E37_79B9_7F4A_7C15)))
    })
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn standard_normal<T: Scalar>(rng: &mut SeededRng) -> T {
    let x: f64 = StandardNormal.sample(rng);
    T::lit(x)
}

pub fn normal_vec<T: Scalar>(rng: &mut SeededRng, len: usize) -> Vec<T> {
    (0..len).map(|_| standard_normal(rng)).collect()
}
