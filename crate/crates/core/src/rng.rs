//! Seeded, platform-independent random streams.
//!
//! Every random draw in the crate comes from [`SeededRng`]:
//!
//! * the generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded through
//!   `SeedableRng::seed_from_u64` (PCG32 expansion of the 64-bit seed),
//! * a uniform double in `[0, 1)` is the top 53 bits of `next_u64` scaled by
//!   `2^-53`,
//! * standard normals use the Box–Muller transform (both outputs are used,
//!   cosine branch first) evaluated with `libm`.
//!
//! None of these steps depends on the platform or on thread scheduling, so a
//! seed reproduces the same stream everywhere.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic random source used for subsampling and Gaussian test matrices.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(radius * libm::sin(theta));
        radius * libm::cos(theta)
    }
}
