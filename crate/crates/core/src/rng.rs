//! Seeded, splittable randomness.
//!
//! One 64-bit seed feeds a ChaCha generator; each consumer takes its own
//! stream id, so suites draw independent, individually reproducible
//! sequences regardless of the order they run in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor_core::Point4;

/// Default seed of every sampled suite.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Generator for stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A point drawn uniformly from `[-1, 1]^4`.
pub fn point_in_cube<R: Rng + ?Sized>(rng: &mut R) -> Point4 {
    std::array::from_fn(|_| rng.random_range(-1.0..=1.0))
}

/// `n` seeded points in `[-1, 1]^4`.
pub fn points(seed: u64, stream_id: u64, n: usize) -> Vec<Point4> {
    let mut rng = stream(seed, stream_id);
    (0..n).map(|_| point_in_cube(&mut rng)).collect()
}
