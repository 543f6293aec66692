//! The tilted-measure normalizer E_{mu_beta}[e^{6 beta a_beta int u^2}]:
//! infinite-product closed form against a Monte Carlo estimate, and the
//! companion constant e^{-3 beta a_beta^2} with its e^{-3/4} limit.

use specmc::measure::{normalizer_companion, normalizer_exact};
use specmc::params::{MeasureParams, Sign};
use specmc::rng::GaussianStream;
use specmc::sampler;
use specmc::wick::a_beta_closed_form;

fn main() {
    println!("{:>8}  {:>14}  {:>14}", "beta", "Z (exact)", "e^(-3 b a^2)");
    for beta in [1e-1, 1e-2, 1e-4, 1e-6] {
        println!(
            "{beta:>8.0e}  {:>14.8}  {:>14.8}",
            normalizer_exact(beta).unwrap(),
            normalizer_companion(beta)
        );
    }
    println!("limits:   e^(3/2) = {:.8},  e^(-3/4) = {:.8}", (1.5f64).exp(), (-0.75f64).exp());

    // MC cross-check at beta = 1e-2
    let beta = 1e-2;
    let params = MeasureParams::new(beta, 1.0, 4, Sign::Focusing, 4096);
    let a = a_beta_closed_form(beta);
    let stream = GaussianStream::new(3, 0);
    let n = 100_000;
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let u = sampler::sample_mu_beta(&params, &stream, i);
            (6.0 * beta * a * u.l2_norm_sq()).exp()
        })
        .collect();
    let est = specmc::Estimate::from_samples(&vals);
    let exact = normalizer_exact(beta).unwrap();
    println!(
        "\nMC at beta = {beta:.0e}, N = 4096, n = {n}: {:.6} +- {:.6}  (exact {:.6}, {:.2} sigma)",
        est.value,
        est.stderr,
        exact,
        (est.value - exact).abs() / est.stderr
    );
}
