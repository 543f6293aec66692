//! Per-sample Wick algebra: int :u^4: = 12 I1 - 6 I2 + IIa + IIb + IIc,
//! then the ensemble moments that the decomposition controls.

use specmc::params::{MeasureParams, Sign};
use specmc::rng::GaussianStream;
use specmc::wick::{moment_checks, WickContext};

fn main() {
    let params = MeasureParams::new(1e-2, 1.0, 4, Sign::Focusing, 256);
    let ctx = WickContext::new(params);
    let stream = GaussianStream::new(7, 0);

    let g = stream.draw_gaussians(params.n_modes, 0);
    let r = ctx.report(&g, None).unwrap();
    println!("one sample at beta = {}:", params.beta);
    println!("  int u^2     = {:.8}", r.int_u2);
    println!("  int u^4     = {:.8}", r.int_u4);
    println!("  int :u^2:   = {:.8}", r.wick_u2);
    println!("  int :u^4:   = {:.8}", r.wick_u4);
    println!("  12 I1       = {:.8}", 12.0 * r.i1);
    println!("  -6 I2       = {:.8}", -6.0 * r.i2);
    println!("  IIa,IIb,IIc = {:.8}, {:.8}, {:.8}", r.ii_a, r.ii_b, r.ii_c);
    println!("  identity residual = {:.3e}", r.decomposition_residual());

    let n = 5000;
    let reports: Vec<_> = (0..n)
        .map(|i| {
            let g = stream.draw_gaussians(params.n_modes, i);
            ctx.report(&g, None).unwrap()
        })
        .collect();
    let mc = moment_checks(&reports, &params);
    println!("\n{n} samples:");
    println!(
        "  mean int :u^2: = {:.5} +- {:.5}   (exact 0)",
        mc.mean_wick_u2, mc.se_mean_wick_u2
    );
    println!(
        "  var  int :u^2: = {:.5} +- {:.5}   (exact 2 b_beta = {:.5})",
        mc.var_wick_u2, mc.se_var_wick_u2, mc.two_b_beta
    );
    println!(
        "  mean int :u^4: = {:.5} +- {:.5}   (exact 0)",
        mc.mean_wick_u4, mc.se_mean_wick_u4
    );
    println!(
        "  beta^(3/2) E[(int :u^4:)^2] = {:.5} +- {:.5}",
        mc.m2_wick_u4_scaled, mc.se_m2_wick_u4_scaled
    );
}
