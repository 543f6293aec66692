//! Invariance of the weighted Gibbs ensemble under the truncated KdV flow,
//! with the unweighted Gaussian base measure as the negative control. Small
//! ensemble here so the example stays fast; the harness experiment runs the
//! full-size version.

use specmc::kdv::{invariance_experiment, FlowConfig};
use specmc::params::{MeasureParams, Sign};
use specmc::rng::GaussianStream;

fn main() {
    let params = MeasureParams::new(0.1, 1.0, 3, Sign::Defocusing, 8);
    let cfg = FlowConfig::new(8, 2e-5, 0.05).unwrap();
    let stream = GaussianStream::new(31, 0);
    let n = 5000;

    for (label, weighted) in [("Gibbs-weighted", true), ("unweighted control", false)] {
        let rep = invariance_experiment(&params, &cfg, n, &stream, weighted).unwrap();
        println!("{label} ({} trajectories):", rep.n_evolved);
        for p in &rep.pairs {
            println!(
                "  {:<12} before {:>9.5} +- {:.5}   after {:>9.5} +- {:.5}   ({:.2} sigma)",
                p.name,
                p.before.value,
                p.before.stderr,
                p.after.value,
                p.after.stderr,
                p.discrepancy_sigmas()
            );
        }
        println!("  worst observable: {:.2} sigma\n", rep.max_discrepancy_sigmas());
    }
    println!("the control drifts most in int u^3 (the conserved Gibbs density is");
    println!("what pins it in the weighted ensemble); at n = 10^5 the harness run");
    println!("separates the two cases cleanly.");
}
