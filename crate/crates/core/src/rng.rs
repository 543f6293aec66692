//! Reproducible Gaussian streams for parallel Monte Carlo.
//!
//! Each sample index gets its own ChaCha12 stream keyed by
//! `(seed, substream, index)`, so ensembles are bit-identical under any
//! partitioning of the index range across workers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// One vector of independent standard complex Gaussians `g_1..g_N`
/// (real and imaginary parts independent, mean 0, variance 1/2).
#[derive(Debug, Clone)]
pub struct GaussianVector {
    pub entries: Vec<Complex64>,
    /// `(substream, index)` that produced this draw.
    pub seed_path: (u32, u64),
}

impl GaussianVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `g_n` for a signed nonzero index, with `g_{-n} = conj(g_n)`.
    pub fn entry(&self, n: i64) -> Complex64 {
        let a = n.unsigned_abs() as usize;
        if n == 0 || a > self.entries.len() {
            Complex64::ZERO
        } else if n > 0 {
            self.entries[a - 1]
        } else {
            self.entries[a - 1].conj()
        }
    }
}

/// A family of independent Gaussian substreams under one experiment seed.
#[derive(Debug, Clone, Copy)]
pub struct GaussianStream {
    seed: u64,
    substream: u32,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

impl GaussianStream {
    pub fn new(seed: u64, substream: u32) -> Self {
        Self { seed, substream }
    }

    pub fn substream(&self, substream: u32) -> Self {
        Self {
            seed: self.seed,
            substream,
        }
    }

    fn rng_at(&self, index: u64) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        let mut s = self.seed;
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(((self.substream as u64) << 32) | (index & 0xffff_ffff));
        rng
    }

    /// Draw `n` standard complex Gaussians at a given sample index.
    pub fn draw_gaussians(&self, n: usize, index: u64) -> GaussianVector {
        let mut rng = self.rng_at(index);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let entries = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * inv_sqrt2, im * inv_sqrt2)
            })
            .collect();
        GaussianVector {
            entries,
            seed_path: (self.substream, index),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahan::kahan_sum;

    #[test]
    fn deterministic_and_stream_separated() {
        let s = GaussianStream::new(42, 0);
        let a = s.draw_gaussians(8, 3);
        let b = s.draw_gaussians(8, 3);
        assert_eq!(a.entries, b.entries);
        let c = s.draw_gaussians(8, 4);
        assert_ne!(a.entries, c.entries);
        let d = s.substream(1).draw_gaussians(8, 3);
        assert_ne!(a.entries, d.entries);
        // different experiment seed, different values
        let e = GaussianStream::new(43, 0).draw_gaussians(8, 3);
        assert_ne!(a.entries, e.entries);
    }

    /// Moments of the complex Gaussian: E[g^k conj(g)^l] = delta_{kl} k!.
    #[test]
    fn complex_gaussian_moments() {
        let s = GaussianStream::new(7, 0);
        let n = 200_000usize;
        let draws: Vec<Complex64> = (0..n).map(|i| s.draw_gaussians(1, i as u64).entries[0]).collect();
        let nf = n as f64;
        let m2 = kahan_sum(draws.iter().map(|g| g.norm_sqr())) / nf;
        let m4 = kahan_sum(draws.iter().map(|g| g.norm_sqr().powi(2))) / nf;
        let m6 = kahan_sum(draws.iter().map(|g| g.norm_sqr().powi(3))) / nf;
        let g2 = draws.iter().map(|g| g * g).sum::<Complex64>() / nf;
        // stderr of |g|^2 is 1/sqrt(n), of |g|^4 is sqrt(E|g|^8 - 4)/sqrt(n) = sqrt(20)/sqrt(n)
        let se = 1.0 / nf.sqrt();
        assert!((m2 - 1.0).abs() < 3.0 * se, "E|g|^2 = {m2}");
        assert!((m4 - 2.0).abs() < 3.0 * 20f64.sqrt() * se, "E|g|^4 = {m4}");
        assert!((m6 - 6.0).abs() < 3.0 * (720f64 - 36.0).sqrt() * se, "E|g|^6 = {m6}");
        // E[g^2] = 0 (k=2, l=0); Var(Re g^2) and Var(Im g^2) are O(1)
        assert!(g2.norm() < 3.0 * 2.0 * se, "E[g^2] = {g2}");
    }

    /// Fourth standardized moment of Re g is 3 (normality probe).
    #[test]
    fn real_part_is_gaussian() {
        let s = GaussianStream::new(11, 2);
        let n = 200_000usize;
        let xs: Vec<f64> = (0..n).map(|i| s.draw_gaussians(1, i as u64).entries[0].re).collect();
        let nf = n as f64;
        let var = kahan_sum(xs.iter().map(|x| x * x)) / nf;
        let m4 = kahan_sum(xs.iter().map(|x| x.powi(4))) / nf;
        let kurt = m4 / (var * var);
        // stderr of the kurtosis of a Gaussian sample is sqrt(24/n)
        assert!((kurt - 3.0).abs() < 5.0 * (24.0 / nf).sqrt(), "kurtosis = {kurt}");
        assert!((var - 0.5).abs() < 3.0 * (0.5 / nf.sqrt()), "var = {var}");
    }
}
