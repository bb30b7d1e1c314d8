//! Seeded, hierarchical random streams.
//!
//! Every random decision in the crate goes through an [`RngStream`]. A stream
//! is a ChaCha8 generator keyed by `(seed, path)`, where `path` is a 64-bit key
//! built by mixing the identifiers passed to [`RngStream::derive`]. Streams
//! with different paths are independent ChaCha keys, so the draws of trial 7
//! never depend on how many draws trial 6 made, or on which thread ran it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::ArrivalOrder;

/// Well-known substream identifiers used by the algorithms and the harness.
pub mod tags {
    pub const ORDER: u64 = 0x006f_7264_6572;
    pub const ALGORITHM: u64 = 0x616c_676f;
    pub const GENERATOR: u64 = 0x67_656e;
    pub const PROBE: u64 = 0x0070_726f_6265;
}

const DOMAIN: u64 = 0x726f_636f_7665_7231;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    key: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::keyed(seed, 0)
    }

    fn keyed(seed: u64, key: u64) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&key.to_le_bytes());
        bytes[16..24].copy_from_slice(&DOMAIN.to_le_bytes());
        Self { seed, key, rng: ChaCha8Rng::from_seed(bytes) }
    }

    /// Child stream for `id`. Depends only on this stream's `(seed, path)`,
    /// never on how many values have been drawn from it.
    pub fn derive(&self, id: u64) -> Self {
        let key = splitmix64(self.key ^ splitmix64(id ^ DOMAIN).rotate_left(17));
        Self::keyed(self.seed, key)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_key(&self) -> u64 {
        self.key
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn uniform_index(&mut self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::Precondition("uniform_index over an empty range".into()));
        }
        Ok(self.rng.gen_range(0..n))
    }

    pub fn bernoulli(&mut self, p: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(self.coin(p))
    }

    /// Bernoulli draw for a probability the caller already clamped to `[0, 1]`.
    pub(crate) fn coin(&mut self, p: f64) -> bool {
        debug_assert!((0.0..=1.0).contains(&p));
        self.rng.gen::<f64>() < p
    }

    /// Index drawn with probability proportional to `weights[i]`.
    pub fn weighted_choice(&mut self, weights: &[f64]) -> Result<usize> {
        let mut total = 0.0;
        for &w in weights {
            if w.is_nan() || w < 0.0 || w.is_infinite() {
                return Err(Error::ZeroWeights);
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::ZeroWeights);
        }
        let target = self.uniform() * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last_positive = i;
                if target < acc {
                    return Ok(i);
                }
            }
        }
        // rounding can leave `target` a hair above the final partial sum
        Ok(last_positive)
    }

    /// Unbiased Fisher-Yates permutation of `0..n`.
    pub fn shuffle(&mut self, n: usize) -> ArrivalOrder {
        let mut perm: Vec<usize> = (0..n).collect();
        self.shuffle_slice(&mut perm);
        ArrivalOrder::from_permutation_unchecked(perm)
    }

    pub fn shuffle_slice<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_bernoulli() {
        let mut rng = RngStream::new(3);
        assert!((0..1000).all(|_| !rng.bernoulli(0.0).unwrap()));
        assert!((0..1000).all(|_| rng.bernoulli(1.0).unwrap()));
    }

    #[test]
    fn invalid_inputs_are_errors() {
        let mut rng = RngStream::new(3);
        assert!(matches!(rng.bernoulli(1.5), Err(Error::InvalidProbability(_))));
        assert!(matches!(rng.bernoulli(-0.1), Err(Error::InvalidProbability(_))));
        assert!(matches!(rng.weighted_choice(&[0.0, 0.0]), Err(Error::ZeroWeights)));
        assert!(matches!(rng.weighted_choice(&[1.0, -1.0]), Err(Error::ZeroWeights)));
        assert!(rng.uniform_index(0).is_err());
    }

    #[test]
    fn bernoulli_mean_within_three_sigma() {
        // sigma of the mean = sqrt(0.3 * 0.7 / 1e5) ~ 0.00145, so 3 sigma ~ 0.0043 < 0.005
        let mut rng = RngStream::new(11);
        let hits = (0..100_000).filter(|_| rng.bernoulli(0.3).unwrap()).count();
        let mean = hits as f64 / 1e5;
        assert!((mean - 0.3).abs() <= 0.005, "mean {mean}");
    }

    #[test]
    fn shuffle_is_uniform_on_four_elements() {
        // chi-square with 23 degrees of freedom; the 0.999 quantile is 49.73
        let mut rng = RngStream::new(5);
        let mut counts = std::collections::HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(rng.shuffle(4).as_slice().to_vec()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = draws as f64 / 24.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 49.73, "chi2 {chi2}");
    }

    #[test]
    fn derived_streams_are_reproducible_and_distinct() {
        let root = RngStream::new(42);
        let mut a = root.derive(1).derive(9);
        let mut b = RngStream::new(42).derive(1).derive(9);
        let mut c = root.derive(9).derive(1);
        let xa: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        let xc: Vec<f64> = (0..8).map(|_| c.uniform()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn derive_ignores_parent_consumption() {
        let mut parent = RngStream::new(1);
        let before = parent.derive(5).uniform();
        for _ in 0..100 {
            parent.uniform();
        }
        assert_eq!(parent.derive(5).uniform(), before);
    }

    #[test]
    fn weighted_choice_respects_weights() {
        let mut rng = RngStream::new(8);
        let w = [0.0, 3.0, 1.0];
        let mut counts = [0usize; 3];
        for _ in 0..40_000 {
            counts[rng.weighted_choice(&w).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        let frac = counts[1] as f64 / 40_000.0;
        assert!((frac - 0.75).abs() < 0.01, "{frac}");
    }
}
