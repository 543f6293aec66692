//! Thin FFT layer: cached plans, 5-smooth grid sizes, and the two transform
//! directions used everywhere else (coefficients -> grid values and back).
//!
//! Conventions: a field with modes `0 < |n| <= N` and half-spectrum
//! coefficients `c_n` (so `u_hat(-n) = conj(c_n)`) is laid out on a length-G
//! complex buffer as bin `n` for positive frequencies and bin `G - n` for
//! negative ones. The inverse transform here is the plain unnormalized
//! rustfft inverse, which evaluates `sum_k X_k e^{2 pi i k j / G}` -- exactly
//! the Fourier series at `x = j/G`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Smallest 5-smooth integer >= `target`.
pub fn fast_grid_size(target: usize) -> usize {
    let mut g = target.max(1);
    loop {
        let mut m = g;
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return g;
        }
        g += 1;
    }
}

/// Evaluate `u(j/G) = sum_{0<|n|<=N} c_n e^{2 pi i n j / G}` (Hermitian
/// extension implied) on a grid of `grid_size` points.
///
/// Caller guarantees `grid_size > 2 * n_modes` (checked upstream).
pub fn synthesize_values(coeffs: &[Complex64], grid_size: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::ZERO; grid_size];
    for (i, &c) in coeffs.iter().enumerate() {
        let n = i + 1;
        buf[n] = c;
        buf[grid_size - n] = c.conj();
    }
    plan(grid_size, true).process(&mut buf);
    buf
}

/// Recover half-spectrum coefficients `c_1..c_N` from grid values.
pub fn analyze_values(values: &[f64], n_modes: usize) -> Vec<Complex64> {
    let g = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(g, false).process(&mut buf);
    let scale = 1.0 / g as f64;
    (1..=n_modes).map(|n| buf[n] * scale).collect()
}

/// Full linear convolution of two signed-index sequences.
///
/// `a` and `b` map index `n in [-n_max, n_max]` to a value via
/// `slot(n) = n + n_max`; the result covers `[-2 n_max, 2 n_max]` in the same
/// layout. Used for the pairing sums, where zero-padding to a 5-smooth length
/// makes the circular FFT convolution exact.
pub fn signed_convolution(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(a.len(), b.len());
    let full = a.len() + b.len() - 1;
    let g = fast_grid_size(full);
    let mut fa = vec![Complex64::ZERO; g];
    let mut fb = vec![Complex64::ZERO; g];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    let fwd = plan(g, false);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    plan(g, true).process(&mut fa);
    let scale = 1.0 / g as f64;
    fa[..full].iter().map(|&z| z * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_grid_sizes() {
        assert_eq!(fast_grid_size(1), 1);
        assert_eq!(fast_grid_size(7), 8);
        assert_eq!(fast_grid_size(97), 100);
        assert_eq!(fast_grid_size(6144), 6144);
    }

    #[test]
    fn convolution_matches_direct() {
        // small signed sequences, direct O(n^2) reference
        let n_max = 3usize;
        let len = 2 * n_max + 1;
        let a: Vec<Complex64> = (0..len)
            .map(|i| Complex64::new(i as f64 - 1.5, (i as f64).sin()))
            .collect();
        let b: Vec<Complex64> = (0..len)
            .map(|i| Complex64::new((i as f64).cos(), 0.25 * i as f64))
            .collect();
        let got = signed_convolution(&a, &b);
        for k in 0..(2 * len - 1) {
            let mut want = Complex64::ZERO;
            for i in 0..len {
                if k >= i && k - i < len {
                    want += a[i] * b[k - i];
                }
            }
            assert!((got[k] - want).norm() < 1e-12);
        }
    }
}
