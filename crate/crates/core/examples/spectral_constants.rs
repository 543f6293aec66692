//! The closed-form spectral constants and their small-beta behaviour:
//! sqrt(beta) a -> 1/2, sqrt(beta) b -> 1/4, sqrt(beta) c -> 5/32.

use specmc::wick::{a_beta_by_summation, a_beta_closed_form, SpectralConstants};

fn main() {
    println!("{:>8}  {:>14}  {:>14}  {:>10}", "beta", "a (closed)", "a (sum)", "rel diff");
    for beta in [1e0, 1e-2, 1e-4, 1e-6] {
        let closed = a_beta_closed_form(beta);
        let summed = a_beta_by_summation(beta);
        println!(
            "{beta:>8.0e}  {closed:>14.8}  {summed:>14.8}  {:>10.2e}",
            (closed - summed).abs() / closed
        );
    }

    // sqrt(beta) a_beta -> 1/(4 pi) * 2 pi = 1/2 in the beta -> 0 limit
    println!("\nbeta^(1/2) a_beta along beta -> 0:");
    for beta in [1e-2f64, 1e-4, 1e-6, 1e-8] {
        println!(
            "  beta = {beta:>6.0e}:  {:.10}",
            beta.sqrt() * a_beta_closed_form(beta)
        );
    }

    println!("\nfull-spectrum constants, scaled by sqrt(beta) (limits 1/2, 1/4, 5/32):");
    println!("{:>8}  {:>12}  {:>12}  {:>12}", "beta", "rb a", "rb b", "rb c");
    for beta in [1e-1f64, 1e-3, 1e-5, 1e-7] {
        let k = SpectralConstants::compute(beta, None);
        let rb = beta.sqrt();
        println!(
            "{beta:>8.0e}  {:>12.6}  {:>12.6}  {:>12.6}",
            rb * k.a,
            rb * k.b,
            rb * k.c
        );
    }

    // truncation to N modes loses mass once N falls under beta^(-1/2)
    println!("\nb at beta = 1e-5, truncated vs full:");
    for n in [64usize, 256, 1024] {
        let t = SpectralConstants::compute(1e-5, Some(n));
        let f = SpectralConstants::compute(1e-5, None);
        println!("  N = {n:>5}: b(N)/b = {:.4}", t.b / f.b);
    }
}
