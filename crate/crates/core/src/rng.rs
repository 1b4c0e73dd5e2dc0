//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by the user
//! seed and a purpose label, with the stream number selecting the replicate.
//! Replicate `r` therefore sees the same numbers no matter how replicates are
//! distributed across threads.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gauss::norm_quantile;

/// Purpose labels separating independent stream families.
pub mod label {
    pub const SIGMA: u64 = 1;
    pub const SIGNALS: u64 = 2;
    pub const MONTE_CARLO: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
    pub const ESTIMATE: u64 = 5;
    pub const TEST: u64 = 99;
}

/// A single reproducible stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Stream `index` of family `label` under `seed`.
    pub fn new(seed: u64, label: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&label.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        Self { rng }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inversion.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        norm_quantile(self.uniform()).expect("uniform draw lies in (0, 1)")
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.normal();
        }
    }

    /// Standard Cauchy by inversion.
    pub fn cauchy(&mut self) -> f64 {
        libm::tan(core::f64::consts::PI * (self.uniform() - 0.5))
    }

    /// Uniform integer in [0, n), unbiased by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "range must be non-empty");
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// `k` distinct indices from 0..p, returned sorted (partial Fisher–Yates).
    pub fn sample_indices(&mut self, p: usize, k: usize) -> Vec<usize> {
        assert!(k <= p, "cannot draw more indices than available");
        let mut pool: Vec<usize> = (0..p).collect();
        for i in 0..k {
            let j = i + self.below((p - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool.sort_unstable();
        pool
    }
}
