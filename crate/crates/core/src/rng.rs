//! Seeded, splittable random streams.
//!
//! A stream is identified by `(seed, stream_id)` and backed by ChaCha8, which is
//! counter based: the same pair always yields the same sequence, on any host and
//! regardless of which thread consumes it. Child streams are derived by hashing
//! the parent identity with a tag, so work can be farmed out to threads with
//! results identical to sequential execution.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    forks: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            forks: 0,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent child stream addressed by `tag`. Does not advance `self`.
    pub fn derive(&self, tag: u64) -> RngStream {
        let seed = splitmix(self.seed ^ splitmix(self.stream_id.wrapping_add(0x9E37_79B9)));
        RngStream::new(seed, tag)
    }

    /// Next child stream in fork order. Deterministic in the number of prior forks.
    pub fn fork(&mut self) -> RngStream {
        let tag = splitmix(self.forks.wrapping_add(0xA5A5_5A5A_0F0F_F0F0));
        self.forks += 1;
        self.derive(tag)
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`; `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Draw from a discrete distribution given by nonnegative `weights`.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.inner.random::<f64>() * total;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                return i;
            }
            u -= w;
        }
        // Rounding can leave u marginally above the last bucket.
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
