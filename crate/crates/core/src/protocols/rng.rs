use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::dist::ProbDist;

/// Identifier recorded with every generated sequence.
///
/// The stream is ChaCha20 keyed through `rand_core`'s `seed_from_u64`
/// (PCG32 expansion of the 64-bit seed). Uniform reals take the top 53 bits
/// of one `u64`: `u = (x >> 11) · 2⁻⁵³ ∈ [0, 1)`.
pub const RNG_ALGORITHM: &str = "chacha20/seed_from_u64/u53";

/// Seeded, reproducible source of uniform variates.
///
/// It stands in for Born-rule measurement collapse and, for the random-time
/// protocol, for the external uniform source.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `floor(u · n)` for one uniform `u`.
    pub fn uniform_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}

/// Inverse-CDF sampler over a fixed distribution.
#[derive(Clone, Debug)]
pub struct InverseCdf {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl InverseCdf {
    pub fn new(dist: &ProbDist) -> Self {
        let mut acc = 0.0;
        let cumulative = dist
            .weights()
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = dist.weights().iter().rposition(|&w| w > 0.0).unwrap_or(0);
        Self {
            cumulative,
            last_positive,
        }
    }

    /// Smallest index `x` with `F(x) > u · F(N−1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let target = u * self.cumulative.last().copied().unwrap_or(0.0);
        let idx = self.cumulative.partition_point(|&c| c <= target);
        idx.min(self.last_positive)
    }

    pub fn sample(&self, rng: &mut RandomSource) -> usize {
        self.sample_with(rng.next_f64())
    }
}
