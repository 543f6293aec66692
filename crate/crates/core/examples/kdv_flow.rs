//! The integrating-factor RK4 KdV solver: L^2 conservation, exact linear
//! phase, time reversal, and the cost of skipping dealiasing.

use num_complex::Complex64;
use specmc::field::SpectralField;
use specmc::kdv::{conservation_audit, evolve, FlowConfig};

fn decaying_field(n_modes: usize, rate: f64) -> SpectralField {
    // every mode populated, fixed by hand so the run is deterministic
    let c = (1..=n_modes)
        .map(|n| {
            let d = (n as f64).powf(rate);
            Complex64::new(0.6 / d, -0.4 / d)
        })
        .collect();
    SpectralField::new(c, 0.0)
}

fn main() {
    // the dispersive phase e^{i (2 pi n)^3 t} is applied exactly, so dt is
    // set by the advective term and by RK4 accuracy, not by (2 pi N)^3
    let u0 = decaying_field(16, 2.0);
    let cfg = FlowConfig::new(16, 1.5e-6, 0.01).unwrap();
    let (mean_drift, l2_drift) = conservation_audit(&u0, &cfg).unwrap();
    println!("N = 16, dt = 1.5e-6, t = 0.01:");
    println!("  mean drift = {mean_drift:.1e} (no zero mode by construction)");
    println!("  relative int u^2 drift = {l2_drift:.3e}");

    // forward then backward returns to the start
    let fwd = evolve(&u0, &cfg).unwrap();
    let back = evolve(&fwd, &cfg.clone().reversed()).unwrap();
    let residual = (1..=16i64)
        .map(|n| (back.coeff(n) - u0.coeff(n)).norm())
        .fold(0.0f64, f64::max);
    println!("  time-reversal residual = {residual:.3e}");

    // the Airy part alone is a pure phase, solved exactly at any dt
    let lin_cfg = FlowConfig::new(16, 1e-2, 1.0).unwrap().linear_only();
    let lin = evolve(&u0, &lin_cfg).unwrap();
    let phase_err = (1..=16i64)
        .map(|n| (lin.coeff(n).norm() - u0.coeff(n).norm()).abs())
        .fold(0.0f64, f64::max);
    println!("  linear-flow modulus drift at dt = 1e-2: {phase_err:.3e}");

    // rough data pushes quadratic products past the band; without the
    // padded grid they fold back in as a genuine solution difference
    let rough = decaying_field(8, 0.5);
    let rough_cfg = FlowConfig::new(8, 2e-5, 0.01).unwrap();
    let clean = evolve(&rough, &rough_cfg).unwrap();
    let mut aliased_cfg = rough_cfg;
    aliased_cfg.dealias = false;
    match evolve(&rough, &aliased_cfg) {
        Ok(aliased) => {
            let diff = (1..=8i64)
                .map(|n| (aliased.coeff(n) - clean.coeff(n)).norm())
                .fold(0.0f64, f64::max);
            println!("  dealiased vs aliased sup difference (rough data) = {diff:.3e}");
        }
        // folded-back energy breaks the conservation watchdog
        Err(e) => println!("  aliased run aborts: {e}"),
    }
}
