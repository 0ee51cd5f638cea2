//! Seeded random streams.
//!
//! Every random quantity is drawn from ChaCha20 (`rand_chacha::ChaCha20Rng`,
//! a counter-based generator) seeded with `seed_from_u64(seed)`. Independent
//! sub-streams use the ChaCha stream id, so results never depend on the order
//! in which parallel workers are scheduled.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex Gaussian sample, real and imaginary parts standard normal.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| complex_gaussian(rng)).collect()
}

/// Gaussian integer with both parts uniform in `-bound..=bound`.
pub fn gaussian_integer<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> (i64, i64) {
    (rng.random_range(-bound..=bound), rng.random_range(-bound..=bound))
}
