//! Counter-based normal streams: one ChaCha8 stream per path, keyed by
//! (seed, path index). Path i's draws never depend on how many paths run
//! or how work is split across threads, so results are bit-identical for
//! any worker count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::inv_norm_cdf;

pub struct PathRng {
    rng: ChaCha8Rng,
}

impl PathRng {
    pub fn new(seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        Self { rng }
    }

    #[inline]
    fn next_uniform(&mut self) -> f64 {
        // 53-bit uniform strictly inside (0, 1).
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw with fixed one-word consumption (inverse CDF).
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        inv_norm_cdf(self.next_uniform())
    }
}
