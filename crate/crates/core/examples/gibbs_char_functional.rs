//! Importance-sampled Gibbs characteristic functional E[e^{i<f,u>}] and its
//! march toward the white-noise value e^{-1/2} as beta -> 0.

use num_complex::Complex64;
use specmc::measure::{build_ensemble, char_functional, TestFunction};
use specmc::params::{MeasureParams, Sign};
use specmc::rng::GaussianStream;

fn main() {
    let n_modes = 2048;
    let n = 20_000;
    let target = (-0.5f64).exp();

    // unit test function spread over modes 1 and 2
    let mut coeffs = vec![Complex64::ZERO; n_modes];
    coeffs[0] = Complex64::new(1.0, 0.0);
    coeffs[1] = Complex64::new(1.0, 0.0);
    let f = TestFunction::new(coeffs).normalized();

    for (label, p, sign, sub0) in [
        ("p = 4 focusing, K = 1", 4u32, Sign::Focusing, 0u32),
        ("p = 4 defocusing     ", 4, Sign::Defocusing, 10),
        ("p = 3 focusing, K = 1", 3, Sign::Focusing, 20),
    ] {
        println!("{label}:");
        for (j, beta) in [1e-1, 1e-2, 1e-3].into_iter().enumerate() {
            let params = MeasureParams::new(beta, 1.0, p, sign, n_modes);
            let stream = GaussianStream::new(11, sub0 + j as u32);
            let ens = build_ensemble(&params, n, &stream).unwrap();
            let est = char_functional(&ens, &f).unwrap();
            println!(
                "  beta = {beta:>6.0e}:  Re = {:.4} +- {:.4}, Im = {:.4}, \
                 |err vs e^(-1/2)| = {:.4}, ESS = {:.0}, accept = {:.2}",
                est.value.re,
                est.stderr,
                est.value.im,
                (est.value.re - target).abs(),
                est.ess,
                ens.acceptance_fraction()
            );
        }
    }
    println!("white-noise limit e^(-1/2) = {target:.4}");
}
