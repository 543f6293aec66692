//! Monte Carlo estimates: plain means, self-normalized importance-sampling
//! ratios with delta-method standard errors, and effective sample sizes.
//!
//! Weights are carried in log scale throughout; they are normalized by their
//! maximum before exponentiation, so ensembles whose raw weights underflow
//! f64 still produce correct ratios.

use crate::kahan::{kahan_sum, Kahan};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Ensembles whose effective sample size falls below this are flagged.
pub const ESS_FLOOR: f64 = 100.0;

/// A real-valued estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    /// `(sum w)^2 / sum w^2`; equals `n` for unweighted ensembles.
    pub ess: f64,
    pub n: usize,
}

impl Estimate {
    /// Plain sample mean with the usual stderr.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        let nf = n as f64;
        let mean = kahan_sum(values.iter().copied()) / nf;
        let var = if n > 1 {
            kahan_sum(values.iter().map(|v| (v - mean).powi(2))) / (nf - 1.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            stderr: (var / nf).sqrt(),
            ess: nf,
            n,
        }
    }

    /// Self-normalized ratio `sum w v / sum w` with the delta-method stderr
    /// `sqrt(sum w^2 (v - R)^2) / sum w`.
    pub fn self_normalized(values: &[f64], log_weights: &[f64]) -> Self {
        assert_eq!(values.len(), log_weights.len());
        let (w, sum_w, sum_w2) = normalized_weights(log_weights);
        let num = kahan_sum(w.iter().zip(values).map(|(&wi, &v)| wi * v));
        let ratio = num / sum_w;
        let var_num = kahan_sum(
            w.iter()
                .zip(values)
                .map(|(&wi, &v)| (wi * (v - ratio)).powi(2)),
        );
        Self {
            value: ratio,
            stderr: var_num.sqrt() / sum_w,
            ess: sum_w * sum_w / sum_w2,
            n: values.len(),
        }
    }

    pub fn low_ess(&self) -> bool {
        self.ess < ESS_FLOOR
    }
}

/// A complex-valued self-normalized estimate; `stderr` combines both
/// components, `sqrt(se_re^2 + se_im^2)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub stderr: f64,
    pub ess: f64,
    pub n: usize,
}

impl ComplexEstimate {
    pub fn self_normalized(values: &[Complex64], log_weights: &[f64]) -> Self {
        assert_eq!(values.len(), log_weights.len());
        let (w, sum_w, sum_w2) = normalized_weights(log_weights);
        let mut num_re = Kahan::new();
        let mut num_im = Kahan::new();
        for (&wi, v) in w.iter().zip(values) {
            num_re.add(wi * v.re);
            num_im.add(wi * v.im);
        }
        let ratio = Complex64::new(num_re.value() / sum_w, num_im.value() / sum_w);
        let var = kahan_sum(
            w.iter()
                .zip(values)
                .map(|(&wi, v)| (wi * wi) * (v - ratio).norm_sqr()),
        );
        Self {
            value: ratio,
            stderr: var.sqrt() / sum_w,
            ess: sum_w * sum_w / sum_w2,
            n: values.len(),
        }
    }

    pub fn low_ess(&self) -> bool {
        self.ess < ESS_FLOOR
    }
}

/// Exponentiate log weights stably; returns `(weights, sum, sum of squares)`.
fn normalized_weights(log_weights: &[f64]) -> (Vec<f64>, f64, f64) {
    assert!(!log_weights.is_empty(), "empty ensemble");
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    // an all -inf ensemble (every sample cut off) is the caller's error
    assert!(max.is_finite(), "all weights vanish");
    let w: Vec<f64> = log_weights.iter().map(|&lw| (lw - max).exp()).collect();
    let sum_w = kahan_sum(w.iter().copied());
    let sum_w2 = kahan_sum(w.iter().map(|&x| x * x));
    (w, sum_w, sum_w2)
}

/// Bootstrap stderr of the self-normalized ratio, for statistics where the
/// delta method is unreliable (small ESS, nonlinear post-processing).
pub fn bootstrap_ratio_stderr(
    values: &[f64],
    log_weights: &[f64],
    seed: u64,
    replicates: usize,
) -> f64 {
    let n = values.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(replicates);
    let mut v = vec![0.0; n];
    let mut lw = vec![0.0; n];
    for _ in 0..replicates {
        for j in 0..n {
            let k = rng.random_range(0..n);
            v[j] = values[k];
            lw[j] = log_weights[k];
        }
        stats.push(Estimate::self_normalized(&v, &lw).value);
    }
    let mean = kahan_sum(stats.iter().copied()) / replicates as f64;
    (kahan_sum(stats.iter().map(|s| (s - mean).powi(2))) / (replicates as f64 - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plain_mean() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(e.value, 2.5);
        // sample var 5/3, stderr sqrt(5/12)
        assert_relative_eq!(e.stderr, (5.0f64 / 12.0).sqrt(), max_relative = 1e-14);
        assert_eq!(e.ess, 4.0);
    }

    #[test]
    fn unit_weights_reduce_to_plain_mean() {
        let vals = [0.3, -1.2, 2.5, 0.0, 4.1];
        let lw = [0.0; 5];
        let a = Estimate::from_samples(&vals);
        let b = Estimate::self_normalized(&vals, &lw);
        assert_relative_eq!(a.value, b.value, max_relative = 1e-14);
        assert_relative_eq!(b.ess, 5.0, max_relative = 1e-14);
        // delta-method uses 1/n normalization, plain uses 1/(n-1)
        assert_relative_eq!(
            b.stderr,
            a.stderr * (4.0f64 / 5.0).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn log_scale_weights_survive_underflow() {
        // raw weights e^{-2000} underflow, ratios must not care
        let vals = [1.0, 3.0];
        let lw = [-2000.0, -2000.0 + (3.0f64).ln()];
        let e = Estimate::self_normalized(&vals, &lw);
        // weights 1:3 -> mean (1 + 9)/4 = 2.5
        assert_relative_eq!(e.value, 2.5, max_relative = 1e-14);
        assert_relative_eq!(e.ess, 16.0 / 10.0, max_relative = 1e-12);
    }

    #[test]
    fn one_dominant_weight_collapses_ess() {
        let vals = vec![1.0; 1000];
        let mut lw = vec![0.0; 1000];
        lw[0] = 40.0;
        let e = Estimate::self_normalized(&vals, &lw);
        assert!(e.ess < 1.1);
        assert!(e.low_ess());
    }

    #[test]
    fn complex_constant_has_zero_stderr() {
        let vals = vec![Complex64::new(0.6, -0.8); 50];
        let lw: Vec<f64> = (0..50).map(|i| -0.01 * i as f64).collect();
        let e = ComplexEstimate::self_normalized(&vals, &lw);
        assert!((e.value - Complex64::new(0.6, -0.8)).norm() < 1e-15);
        assert!(e.stderr < 1e-15);
    }

    #[test]
    fn bootstrap_agrees_with_delta_method() {
        // mild weights, smooth statistic: the two stderrs should agree
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let n = 2000;
        let vals: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let lw: Vec<f64> = (0..n).map(|_| 0.2 * (rng.random::<f64>() - 0.5)).collect();
        let delta = Estimate::self_normalized(&vals, &lw).stderr;
        let boot = bootstrap_ratio_stderr(&vals, &lw, 7, 400);
        assert!((boot / delta - 1.0).abs() < 0.2, "boot {boot} delta {delta}");
    }
}
