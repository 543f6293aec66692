//! Tail machinery: the chi-square tail bound against the incomplete-gamma
//! oracle, a lambda sweep with its fitted stretched-exponential exponent,
//! and the dyadic block audit.

use specmc::measure::{chi2_tail_check, dyadic_tail_audit, tail_sweep};
use specmc::params::{MeasureParams, Sign};
use specmc::rng::GaussianStream;

fn main() {
    println!("chi-square tails, P(chi^2_2M > R^2) <= e^(M - R^2/4) for R >= 2 sqrt(M):");
    for m in [1usize, 8, 64, 128] {
        let r = 4.0 * (m as f64).sqrt();
        let t = chi2_tail_check(m, r).unwrap();
        println!(
            "  M = {m:>3}, R = 4 sqrt(M):  ln P = {:>10.3}  <=  ln bound = {:>10.3}  ({})",
            t.ln_exact,
            t.ln_bound,
            if t.bound_holds() { "holds" } else { "VIOLATED" }
        );
    }

    let beta = 1e-2;
    let params = MeasureParams::new(beta, 1.0, 4, Sign::Focusing, 2048);
    let stream = GaussianStream::new(5, 0);
    let lambdas = [1.0, 1.26, 1.59, 2.0, 2.52, 3.17];
    let sweep = tail_sweep(&params, &lambdas, 400_000, &stream).unwrap();
    println!("\nP(beta int u^4 > lambda, int u^2 <= K beta^(-1/2)) at beta = {beta:.0e}:");
    for r in &sweep.reports {
        println!(
            "  lambda = {:>5.2}:  p = {:.5} +- {:.5}  ({} hits)",
            r.lambda, r.estimate.value, r.estimate.stderr, r.hits
        );
    }
    if let (Some(e), Some((lo, hi))) = (sweep.fitted_exponent, sweep.exponent_ci) {
        println!("  fitted exponent of ln(-ln p) vs ln lambda: {e:.3}, 95% CI [{lo:.3}, {hi:.3}]");
    }

    let audit = dyadic_tail_audit(&params, 128, 1.0, 20_000, &stream.substream(1)).unwrap();
    println!(
        "\ndyadic audit at M = 128: tail p = {:.5} +- {:.5}, block-sum discrepancy {:.2e}, \
         analytic exponent {:.3}",
        audit.tail.estimate.value,
        audit.tail.estimate.stderr,
        audit.block_max_discrepancy,
        audit.analytic_exponent
    );
}
