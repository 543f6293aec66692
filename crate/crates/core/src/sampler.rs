//! Samplers for every Gaussian measure in the family, as pure maps from a
//! Gaussian vector to a spectral field.
//!
//! All members share the same underlying stream: evaluating them on one
//! `GaussianVector` gives the almost-sure coupling `u_hat(n) = g_n * w_n`
//! with the measure-specific weight `w_n`, which is what the pathwise
//! `beta -> 0` convergence tests rely on.

use crate::error::{LabError, Result};
use crate::field::SpectralField;
use crate::params::MeasureParams;
use crate::rng::{GaussianStream, GaussianVector};

/// `u_hat(n) = g_n / sqrt(1 + beta_tilde n^2)` -- the interpolation measure.
pub fn mu_beta_field(g: &GaussianVector, params: &MeasureParams) -> SpectralField {
    let bt = params.beta_tilde();
    scaled(g, params.beta, |n| 1.0 / (1.0 + bt * n * n).sqrt())
}

/// `u_hat(n) = beta_tilde^{-1/2} g_n / n` -- the mean-zero Wiener loop.
pub fn p0_beta_field(g: &GaussianVector, params: &MeasureParams) -> SpectralField {
    let scale = params.beta_tilde().powf(-0.5);
    scaled(g, params.beta, |n| scale / n)
}

/// `u_hat(n) = g_n` -- white noise, the beta = 0 member on the same stream.
pub fn white_noise_field(g: &GaussianVector) -> SpectralField {
    scaled(g, 0.0, |_| 1.0)
}

/// `u_hat(n) = g_n / sqrt(1 - 12 beta a_beta + beta_tilde n^2)` -- the
/// tilted measure. Fails when `12 beta a_beta >= 1`.
pub fn mu_tilde_beta_field(
    g: &GaussianVector,
    params: &MeasureParams,
    a_beta: f64,
) -> Result<SpectralField> {
    let tilt = 12.0 * params.beta * a_beta;
    if tilt >= 1.0 {
        return Err(LabError::IllDefinedMeasure { value: tilt });
    }
    let bt = params.beta_tilde();
    Ok(scaled(g, params.beta, |n| {
        1.0 / (1.0 - tilt + bt * n * n).sqrt()
    }))
}

fn scaled(g: &GaussianVector, beta_tag: f64, weight: impl Fn(f64) -> f64) -> SpectralField {
    let coeffs = g
        .entries
        .iter()
        .enumerate()
        .map(|(i, gn)| gn * weight((i + 1) as f64))
        .collect();
    SpectralField::new(coeffs, beta_tag)
}

/// Convenience samplers drawing their own Gaussians at `index`.
pub fn sample_mu_beta(params: &MeasureParams, stream: &GaussianStream, index: u64) -> SpectralField {
    mu_beta_field(&stream.draw_gaussians(params.n_modes, index), params)
}

pub fn sample_p0_beta(params: &MeasureParams, stream: &GaussianStream, index: u64) -> SpectralField {
    p0_beta_field(&stream.draw_gaussians(params.n_modes, index), params)
}

pub fn sample_white_noise(n_modes: usize, stream: &GaussianStream, index: u64) -> SpectralField {
    white_noise_field(&stream.draw_gaussians(n_modes, index))
}

pub fn sample_mu_tilde_beta(
    params: &MeasureParams,
    a_beta: f64,
    stream: &GaussianStream,
    index: u64,
) -> Result<SpectralField> {
    mu_tilde_beta_field(&stream.draw_gaussians(params.n_modes, index), params, a_beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahan::kahan_sum;
    use crate::params::Sign;

    fn params(beta: f64, n: usize) -> MeasureParams {
        MeasureParams::new(beta, 1.0, 4, Sign::Focusing, n)
    }

    #[test]
    fn mu_beta_mode_variance() {
        // N=1: Var(Re u_hat_1) = (1/2) / (1 + beta_tilde)
        let p = params(0.05, 1);
        let s = GaussianStream::new(5, 0);
        let n = 400_000;
        let mut acc = 0.0;
        for i in 0..n {
            let c = sample_mu_beta(&p, &s, i).coeffs()[0];
            acc += c.re * c.re;
        }
        let var = acc / n as f64;
        let want = 0.5 / (1.0 + p.beta_tilde());
        let se = want * (2.0 / n as f64).sqrt();
        assert!((var - want).abs() < 3.0 * se, "var {var} want {want}");
    }

    #[test]
    fn mu_beta_large_beta_damps() {
        let s = GaussianStream::new(1, 0);
        let g = s.draw_gaussians(16, 0);
        let small = mu_beta_field(&g, &params(1.0, 16)).l2_norm_sq();
        let smaller = mu_beta_field(&g, &params(100.0, 16)).l2_norm_sq();
        assert!(smaller < small / 50.0);
    }

    #[test]
    fn p0_beta_unit_scaling() {
        // beta_tilde = 1: u_hat(n) = g_n / n, so Var(Re u_hat_1) = 1/2
        let beta = 1.0 / (4.0 * std::f64::consts::PI.powi(2));
        let p = params(beta, 4);
        assert!((p.beta_tilde() - 1.0).abs() < 1e-15);
        let s = GaussianStream::new(9, 0);
        let g = s.draw_gaussians(4, 0);
        let f = p0_beta_field(&g, &p);
        for (i, c) in f.coeffs().iter().enumerate() {
            let want = g.entries[i] / (i as f64 + 1.0);
            assert!((c - want).norm() < 1e-15);
        }
    }

    #[test]
    fn p0_beta_l2_mean_is_basel_sum() {
        // E[int u^2] = beta_tilde^{-1} 2 sum n^{-2} -> beta_tilde^{-1} pi^2/3
        let beta = 1.0 / (4.0 * std::f64::consts::PI.powi(2));
        let n_modes = 512;
        let p = params(beta, n_modes);
        let s = GaussianStream::new(3, 1);
        let n = 20_000;
        let vals: Vec<f64> = (0..n)
            .map(|i| sample_p0_beta(&p, &s, i).l2_norm_sq())
            .collect();
        let mean = kahan_sum(vals.iter().copied()) / n as f64;
        let truncated: f64 = 2.0 * (1..=n_modes).map(|k| 1.0 / (k * k) as f64).sum::<f64>();
        let var = kahan_sum(vals.iter().map(|v| (v - mean).powi(2))) / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - truncated).abs() < 3.0 * se, "mean {mean} want {truncated}");
        assert!((truncated - std::f64::consts::PI.powi(2) / 3.0).abs() < 0.01);
    }

    #[test]
    fn p0_beta_sobolev_divergence() {
        // sum n^{-2s-2}: converges for s=-1, diverges with N for s=+1
        use crate::field::SobolevIndex;
        let beta = 1.0 / (4.0 * std::f64::consts::PI.powi(2));
        let s = GaussianStream::new(17, 0);
        let g_small = s.draw_gaussians(64, 0);
        let g_large = s.draw_gaussians(512, 0);
        let f_small = p0_beta_field(&g_small, &params(beta, 64));
        let f_large = p0_beta_field(&g_large, &params(beta, 512));
        let neg_small = f_small.sobolev_norm_sq(SobolevIndex(-1.0));
        let neg_large = f_large.sobolev_norm_sq(SobolevIndex(-1.0));
        // s=-1 norm stabilizes (tail sum n^-4)
        assert!((neg_large - neg_small).abs() < 0.05 * neg_small.max(1.0));
        // s=+1 norm keeps growing linearly in N
        let pos_small = f_small.sobolev_norm_sq(SobolevIndex(1.0));
        let pos_large = f_large.sobolev_norm_sq(SobolevIndex(1.0));
        assert!(pos_large > 3.0 * pos_small);
    }

    #[test]
    fn white_noise_is_identity_on_gaussians() {
        let s = GaussianStream::new(2, 0);
        let g = s.draw_gaussians(8, 0);
        let f = white_noise_field(&g);
        assert_eq!(f.coeffs(), g.entries.as_slice());
        // E[int u^2] = 2N with unit-variance modes; single draw sanity only
        assert!(f.l2_norm_sq() > 0.0);
    }

    #[test]
    fn mu_tilde_reduces_to_mu_at_zero_tilt() {
        let p = params(0.01, 8);
        let s = GaussianStream::new(4, 0);
        let g = s.draw_gaussians(8, 0);
        let a = mu_tilde_beta_field(&g, &p, 0.0).unwrap();
        let b = mu_beta_field(&g, &p);
        assert_eq!(a.coeffs(), b.coeffs());
    }

    #[test]
    fn mu_tilde_rejects_large_tilt() {
        let p = params(1.0, 8);
        let s = GaussianStream::new(4, 0);
        let g = s.draw_gaussians(8, 0);
        assert!(matches!(
            mu_tilde_beta_field(&g, &p, 1.0),
            Err(LabError::IllDefinedMeasure { .. })
        ));
    }

    #[test]
    fn mu_tilde_mode_variance() {
        // Var(Re u_hat_1) = (1/2) / (1 - 12 beta a + beta_tilde)
        let p = params(0.02, 1);
        let a_beta = 2.0; // any admissible tilt value
        let s = GaussianStream::new(6, 0);
        let n = 400_000;
        let mut acc = 0.0;
        for i in 0..n {
            let c = sample_mu_tilde_beta(&p, a_beta, &s, i).unwrap().coeffs()[0];
            acc += c.re * c.re;
        }
        let var = acc / n as f64;
        let want = 0.5 / (1.0 - 12.0 * p.beta * a_beta + p.beta_tilde());
        let se = want * (2.0 / n as f64).sqrt();
        assert!((var - want).abs() < 3.0 * se, "var {var} want {want}");
    }

    #[test]
    fn cross_mode_covariance_vanishes() {
        let p = params(0.05, 2);
        let s = GaussianStream::new(8, 0);
        let n = 200_000;
        let mut acc = num_complex::Complex64::ZERO;
        for i in 0..n {
            let f = sample_mu_beta(&p, &s, i);
            acc += f.coeffs()[0] * f.coeffs()[1].conj();
        }
        let cov = acc / n as f64;
        let se = 1.0 / (n as f64).sqrt();
        assert!(cov.norm() < 3.0 * se, "cov {cov}");
    }
}
