//! Deterministic, path-addressed random streams.
//!
//! Every random quantity in this crate comes from an [`RngStream`] identified
//! by a master seed and a path of indices, e.g. `[rep]` for a Monte Carlo
//! replicate or `[rep, draw]` for one bootstrap draw inside it. A stream is
//! derived from its address alone (never from another stream's mutable state),
//! so replicates and draws can be produced in any order, on any number of
//! workers, or in a fresh process, and the sampled values are identical.
//!
//! Derivation mixes the seed, the path length, and each path element through
//! the splitmix64 finalizer into a ChaCha12 key. ChaCha12 is a fixed algorithm
//! with no platform-dependent behavior, which is what makes byte-identical
//! output files possible.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Exp1, StandardNormal, StudentT};

/// splitmix64 finalizer. Statistically strong 64-bit mixing in three rounds.
fn mix(h: u64, v: u64) -> u64 {
    let mut z = (h ^ v).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapse (master_seed, path) into a 64-bit ChaCha key. The path length is
/// absorbed first so that a path is never a prefix-collision of another.
fn derive_key(master_seed: u64, path: &[u64]) -> u64 {
    let mut h = mix(0x5EED_5EED_5EED_5EED, master_seed);
    h = mix(h, path.len() as u64);
    for (i, &p) in path.iter().enumerate() {
        h = mix(h, i as u64);
        h = mix(h, p);
    }
    h
}

/// A seeded random stream addressed by (master seed, path).
///
/// Sampling methods advance internal state; [`RngStream::child`] does not (it
/// derives a fresh stream from the address only).
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<u64>,
    rng: ChaCha12Rng,
}

impl RngStream {
    /// Derive the stream for a (master seed, path) address.
    pub fn derive(master_seed: u64, path: &[u64]) -> Self {
        RngStream {
            master_seed,
            path: path.to_vec(),
            rng: ChaCha12Rng::seed_from_u64(derive_key(master_seed, path)),
        }
    }

    /// The stream addressed by this stream's path extended with `index`.
    /// Independent of how much this stream has already been consumed.
    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        RngStream::derive(self.master_seed, &path)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// One N(0, 1) draw.
    pub fn sample_standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `d` iid N(0, 1) draws.
    pub fn sample_standard_normal_vec(&mut self, d: usize) -> Vec<f64> {
        (0..d).map(|_| self.sample_standard_normal()).collect()
    }

    /// One Student-t(5) draw scaled by sqrt(3/5) so the variance is 1.
    pub fn sample_standardized_t5(&mut self) -> f64 {
        let t: f64 = self.rng.sample(StudentT::new(5.0).expect("valid dof"));
        t * (0.6f64).sqrt()
    }

    /// One Exp(1) - 1 draw: mean 0, variance 1, skewness 2.
    pub fn sample_centered_exponential(&mut self) -> f64 {
        let e: f64 = self.rng.sample(Exp1);
        e - 1.0
    }

    /// Uniform draw in [0, 1).
    pub fn sample_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in 0..n.
    pub fn sample_index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// +1 or -1 with equal probability.
    pub fn sample_rademacher(&mut self) -> f64 {
        if self.rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.sample_index(i + 1);
            items.swap(i, j);
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn draws(stream: &mut RngStream, k: usize) -> Vec<f64> {
        (0..k).map(|_| stream.sample_uniform()).collect()
    }

    #[test]
    fn same_address_same_sequence() {
        let mut a = RngStream::derive(42, &[3, 7]);
        let mut b = RngStream::derive(42, &[3, 7]);
        assert_eq!(draws(&mut a, 100), draws(&mut b, 100));
    }

    #[test]
    fn distinct_addresses_distinct_sequences() {
        // Includes prefix pairs like [1] vs [1,0] and transposed elements.
        let paths: &[&[u64]] = &[
            &[],
            &[0],
            &[1],
            &[0, 0],
            &[0, 1],
            &[1, 0],
            &[1, 1],
            &[0, 0, 0],
            &[7, 3],
            &[3, 7],
        ];
        let mut seen = HashSet::new();
        for &p in paths {
            let mut s = RngStream::derive(9, p);
            let fingerprint: Vec<u64> = (0..4).map(|_| s.next_u64()).collect();
            assert!(seen.insert(fingerprint), "collision at path {p:?}");
        }
        // Different master seeds with the same path must also differ.
        let mut a = RngStream::derive(1, &[5]);
        let mut b = RngStream::derive(2, &[5]);
        assert_ne!(draws(&mut a, 8), draws(&mut b, 8));
    }

    #[test]
    fn child_is_consumption_independent() {
        let mut used = RngStream::derive(11, &[2]);
        let _ = draws(&mut used, 57);
        let fresh = RngStream::derive(11, &[2]);
        let mut c1 = used.child(4);
        let mut c2 = fresh.child(4);
        assert_eq!(draws(&mut c1, 32), draws(&mut c2, 32));
        assert_eq!(c1.path(), &[2, 4]);
        // Child order does not matter either.
        let mut c3 = fresh.child(9);
        let mut c4 = RngStream::derive(11, &[2, 9]);
        assert_eq!(draws(&mut c3, 32), draws(&mut c4, 32));
    }

    #[test]
    fn standard_normal_moments() {
        let n = 1_000_000;
        let mut s = RngStream::derive(2024, &[0]);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let x = s.sample_standard_normal();
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn standardized_t5_moments() {
        let n = 1_000_000;
        let mut s = RngStream::derive(2024, &[1]);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let mut tail = 0usize;
        for _ in 0..n {
            let x = s.sample_standardized_t5();
            sum += x;
            sum2 += x * x;
            if x.abs() > 3.0 {
                tail += 1;
            }
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
        // Tail mass identifies the scaled t(5): P(|X| > 3) = 0.011725, versus
        // 0.0027 for a standard normal. (Sample kurtosis is useless as a check
        // here; the eighth moment of t(5) diverges.)
        let tail_frac = tail as f64 / n as f64;
        assert!(
            (0.0105..0.0130).contains(&tail_frac),
            "tail fraction {tail_frac}"
        );
    }

    #[test]
    fn centered_exponential_moments() {
        let n = 1_000_000;
        let mut s = RngStream::derive(2024, &[2]);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let mut sum3 = 0.0;
        for _ in 0..n {
            let x = s.sample_centered_exponential();
            sum += x;
            sum2 += x * x;
            sum3 += x * x * x;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        let skew = sum3 / n as f64 / var.powf(1.5);
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
        assert!((skew - 2.0).abs() < 0.1, "skewness {skew}");
    }

    #[test]
    fn rademacher_is_balanced_and_unit_variance() {
        let n = 100_000;
        let mut s = RngStream::derive(5, &[0]);
        let mut sum = 0.0;
        for _ in 0..n {
            let x = s.sample_rademacher();
            assert!(x == 1.0 || x == -1.0);
            sum += x;
        }
        assert!((sum / n as f64).abs() < 0.02);
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut s = RngStream::derive(8, &[0]);
        let mut v: Vec<usize> = (0..50).collect();
        s.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, (0..50).collect::<Vec<_>>());
    }
}
