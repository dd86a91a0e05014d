//! Seeded randomness.
//!
//! Every random object in the crate is drawn from a [`ChaCha8Rng`] seeded
//! with a 64-bit integer. Independent sub-streams (per trial, per component)
//! are obtained by selecting a ChaCha stream rather than by reseeding, so a
//! single master seed fans out deterministically.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use rand_chacha::ChaCha8Rng as SeededRng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A generator on stream `stream` of the master `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed for stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    substream(seed, stream).next_u64()
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_signs<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<i8> {
    (0..len)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect()
}
