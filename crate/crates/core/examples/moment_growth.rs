//! Moment growth of the pairing sum F_{beta,M} = beta * IIa restricted to
//! |n_j| <= M: L^q norms against the q^2 beta^(1/4) envelope, the exact
//! second-moment oracle, and exponential moments of the Gibbs weight.

use specmc::measure::{exp_moment, moment_norm};
use specmc::params::{MeasureParams, Sign};
use specmc::rng::GaussianStream;
use specmc::wick::{ii_a_second_moment_exact, WickContext};

fn main() {
    let n_modes = 2048;
    let n = 4000;
    for beta in [1e-1, 1e-2, 1e-3] {
        let params = MeasureParams::new(beta, 1.0, 4, Sign::Focusing, n_modes);
        let ctx = WickContext::new(params);
        let stream = GaussianStream::new(17, 0);
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let g = stream.draw_gaussians(n_modes, i);
                ctx.report(&g, Some(n_modes)).unwrap().f_beta_m.unwrap()
            })
            .collect();
        let exact_l2 = beta * ii_a_second_moment_exact(beta, n_modes).sqrt();
        print!("beta = {beta:>6.0e}:  ");
        for q in [2.0, 4.0, 6.0] {
            let est = moment_norm(&f, q, 99).unwrap();
            print!(
                "||F||_{q:.0} / (q^2 b^(1/4)) = {:.5}  ",
                est.value / (q * q * beta.powf(0.25))
            );
        }
        println!("\n{:14}exact ||F||_2 = {exact_l2:.5e}", "");
    }

    println!("\nexponential moments E[1_cutoff e^(sigma beta int u^p)] at r = 1:");
    for p in [3u32, 4] {
        for beta in [1e-1, 1e-2, 1e-3] {
            let params = MeasureParams::new(beta, 1.0, p, Sign::Focusing, n_modes);
            let stream = GaussianStream::new(23, p);
            let est = exp_moment(&params, 1.0, 50_000, &stream).unwrap();
            println!(
                "  p = {p}, beta = {beta:>6.0e}:  {:.5} +- {:.5}",
                est.value, est.stderr
            );
        }
    }
}
