//! Pseudospectral KdV on the circle and the measure-invariance experiment.
//!
//! The flow is `u_t + u_xxx - 6 u u_x = 0`, integrated in Fourier space by
//! integrating-factor RK4: the dispersive phase `e^{i (2 pi n)^3 t}` is
//! applied exactly (it is unitary, so the linear dynamics preserves every
//! `|u_hat(n)|` to machine precision) and only the nonlinearity
//! `3 (u^2)_x` is stepped. The quadratic term is evaluated on a grid large
//! enough that its projection back to `|n| <= N` is alias-free, which makes
//! the scheme the exact Fourier-Galerkin truncation in space.
//!
//! For this sign convention the conserved energy is
//! `H = 1/2 int u_x^2 + int u^3`, so the Gibbs density that the truncated
//! flow preserves relative to the Gaussian base measure carries the weight
//! `e^{-beta int u^3}` (the `u -> -u` mirror of the `+` convention).

use crate::error::{LabError, Result};
use crate::estimate::Estimate;
use crate::fft;
use crate::field::SpectralField;
use crate::kahan::kahan_sum;
use crate::measure::{build_ensemble, TestFunction, WeightedEnsemble};
use crate::params::MeasureParams;
use crate::rng::GaussianStream;
use num_complex::Complex64;
use rayon::prelude::*;

/// Relative `int u^2` drift that aborts a trajectory.
const BLOWUP_TOL: f64 = 1e-3;
/// RK4 stability reach along the imaginary axis.
const RK4_IMAG_LIMIT: f64 = 2.82;

/// Time-stepping parameters for one flow.
#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    pub n_modes: usize,
    pub dt: f64,
    /// May be negative: the flow is run backwards (time-reversal checks).
    pub t_final: f64,
    /// Alias-free quadratic term (grid of at least `3N + 1` points). Off
    /// only for aliasing-contrast experiments.
    pub dealias: bool,
    /// Disable to integrate the Airy part alone.
    pub nonlinear: bool,
}

impl FlowConfig {
    pub fn new(n_modes: usize, dt: f64, t_final: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(LabError::Validation {
                field: "n_modes",
                constraint: "N >= 1".into(),
            });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(LabError::Validation {
                field: "dt",
                constraint: "dt > 0".into(),
            });
        }
        if !t_final.is_finite() {
            return Err(LabError::Validation {
                field: "t_final",
                constraint: "t_final finite".into(),
            });
        }
        Ok(Self {
            n_modes,
            dt,
            t_final,
            dealias: true,
            nonlinear: true,
        })
    }

    pub fn reversed(mut self) -> Self {
        self.t_final = -self.t_final;
        self
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    fn grid_size(&self) -> usize {
        let target = if self.dealias {
            3 * self.n_modes + 1
        } else {
            2 * self.n_modes + 1
        };
        fft::fast_grid_size(target)
    }

    /// Advective CFL for the actual data: the integrating factor removes the
    /// `(2 pi N)^3` dispersive restriction, so the binding limit is
    /// `dt * 6 max|u| * 2 pi N` within the RK4 stability reach.
    fn check_cfl(&self, u_max: f64) -> Result<()> {
        if !self.nonlinear {
            return Ok(());
        }
        let z = self.dt * 6.0 * u_max * 2.0 * std::f64::consts::PI * self.n_modes as f64;
        if z > RK4_IMAG_LIMIT {
            return Err(LabError::Precondition(format!(
                "time step violates the advective stability limit: \
                 dt * 6 max|u| * 2 pi N = {z:.3} > {RK4_IMAG_LIMIT}"
            )));
        }
        Ok(())
    }
}

/// Below this band-limit the quadratic term is cheaper as a direct
/// convolution than as a transform round-trip.
const DIRECT_CONV_LIMIT: usize = 48;

/// `(u^2)` coefficients `1..n` into `out`, alias-free when requested.
fn quadratic_hat(c: &[Complex64], grid_size: usize, dealias: bool, out: &mut [Complex64]) {
    let n = c.len();
    if dealias && n <= DIRECT_CONV_LIMIT {
        // exact signed convolution; small N makes this the fast path
        let coeff = |k: i64| -> Complex64 {
            let a = k.unsigned_abs() as usize;
            if k == 0 || a > n {
                Complex64::ZERO
            } else if k > 0 {
                c[a - 1]
            } else {
                c[a - 1].conj()
            }
        };
        for m in 1..=n {
            let mut q = Complex64::ZERO;
            let lo = (m as i64 - n as i64).max(-(n as i64));
            for a in lo..=(n as i64) {
                q += coeff(a) * coeff(m as i64 - a);
            }
            out[m - 1] = q;
        }
        return;
    }
    let grid = fft::synthesize_values(c, grid_size);
    let squared: Vec<f64> = grid.iter().map(|z| z.re * z.re).collect();
    out.copy_from_slice(&fft::analyze_values(&squared, n));
}

/// Run the flow to `cfg.t_final`.
pub fn evolve(field: &SpectralField, cfg: &FlowConfig) -> Result<SpectralField> {
    if field.n_modes() > cfg.n_modes {
        return Err(LabError::DimensionMismatch {
            left: field.n_modes(),
            right: cfg.n_modes,
            context: "initial data band-limit vs flow resolution",
        });
    }
    let n = cfg.n_modes;
    let mut c = vec![Complex64::ZERO; n];
    c[..field.n_modes()].copy_from_slice(field.coeffs());
    if cfg.t_final == 0.0 {
        return Ok(SpectralField::new(c, field.beta_tag));
    }

    let steps = ((cfg.t_final.abs() / cfg.dt).ceil() as usize).max(1);
    let h = cfg.t_final / steps as f64;
    let g = cfg.grid_size();

    let u_max = fft::synthesize_values(&c, g)
        .iter()
        .map(|z| z.re.abs())
        .fold(0.0, f64::max);
    cfg.check_cfl(u_max)?;

    // omega_n = (2 pi n)^3; u_hat' = i omega u_hat + i 6 pi n (u^2)_hat
    let half_phase: Vec<Complex64> = (1..=n)
        .map(|k| Complex64::new(0.0, (2.0 * std::f64::consts::PI * k as f64).powi(3) * h / 2.0).exp())
        .collect();
    let full_phase: Vec<Complex64> = half_phase.iter().map(|p| p * p).collect();
    let deriv: Vec<Complex64> = (1..=n)
        .map(|k| Complex64::new(0.0, 6.0 * std::f64::consts::PI * k as f64))
        .collect();

    // stage buffers reused across steps; evolve runs per trajectory inside
    // large ensembles, so per-step allocation is measurable
    let mut k1 = vec![Complex64::ZERO; n];
    let mut k2 = vec![Complex64::ZERO; n];
    let mut k3 = vec![Complex64::ZERO; n];
    let mut k4 = vec![Complex64::ZERO; n];
    let mut stage = vec![Complex64::ZERO; n];
    let mut q = vec![Complex64::ZERO; n];

    let l2_initial = 2.0 * kahan_sum(c.iter().map(|z| z.norm_sqr()));
    for step in 0..steps {
        // classical RK4 in the co-rotating (integrating-factor) frame
        macro_rules! nonlin {
            ($input:expr, $out:expr) => {
                if cfg.nonlinear {
                    quadratic_hat($input, g, cfg.dealias, &mut q);
                    for i in 0..n {
                        $out[i] = deriv[i] * q[i];
                    }
                } else {
                    $out.fill(Complex64::ZERO);
                }
            };
        }
        nonlin!(&c, k1);
        for i in 0..n {
            stage[i] = (c[i] + h / 2.0 * k1[i]) * half_phase[i];
        }
        nonlin!(&stage, k2);
        for i in 0..n {
            k2[i] *= half_phase[i].conj();
            stage[i] = (c[i] + h / 2.0 * k2[i]) * half_phase[i];
        }
        nonlin!(&stage, k3);
        for i in 0..n {
            k3[i] *= half_phase[i].conj();
            stage[i] = (c[i] + h * k3[i]) * full_phase[i];
        }
        nonlin!(&stage, k4);
        for i in 0..n {
            k4[i] *= full_phase[i].conj();
            c[i] = (c[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])) * full_phase[i];
        }

        if l2_initial > 0.0 {
            let l2 = 2.0 * kahan_sum(c.iter().map(|z| z.norm_sqr()));
            let drift = (l2 - l2_initial).abs() / l2_initial;
            if drift > BLOWUP_TOL {
                return Err(LabError::BlowUp {
                    drift,
                    t: (step + 1) as f64 * h,
                });
            }
        }
    }
    Ok(SpectralField::new(c, field.beta_tag))
}

/// Relative drifts of the two elementary conserved quantities over
/// `[0, t_final]`: `(int u, int u^2)`. The mean is structurally exact.
pub fn conservation_audit(field: &SpectralField, cfg: &FlowConfig) -> Result<(f64, f64)> {
    let before = field.l2_norm_sq();
    let after = evolve(field, cfg)?.l2_norm_sq();
    let l2_drift = if before > 0.0 {
        (after - before).abs() / before
    } else {
        after.abs()
    };
    // no zero mode exists, so int u = 0 identically on both sides
    Ok((0.0, l2_drift))
}

/// One observable measured before and after the flow on the same weighted
/// ensemble.
#[derive(Debug, Clone)]
pub struct ObservablePair {
    pub name: String,
    pub before: Estimate,
    pub after: Estimate,
}

impl ObservablePair {
    /// `|after - before| / sqrt(se_b^2 + se_a^2)`.
    pub fn discrepancy_sigmas(&self) -> f64 {
        let se = self.before.stderr.hypot(self.after.stderr);
        if se == 0.0 {
            if self.after.value == self.before.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.after.value - self.before.value).abs() / se
        }
    }
}

/// Before/after comparison of every observable across the flow.
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub pairs: Vec<ObservablePair>,
    pub n_evolved: usize,
    pub n_excluded: usize,
}

impl InvarianceReport {
    pub fn max_discrepancy_sigmas(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.discrepancy_sigmas())
            .fold(0.0, f64::max)
    }

    pub fn all_within(&self, sigmas: f64) -> bool {
        self.pairs.iter().all(|p| p.discrepancy_sigmas() <= sigmas)
    }
}

/// Per-sample observable vector: characteristic-functional panel (real and
/// imaginary parts), low-mode energies, `int u^2`, and `int :u^4:`.
fn observables(u: &SpectralField, panel: &[TestFunction], a_beta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * panel.len() + 8);
    for f in panel {
        let phase = u.pair(&f.field);
        out.push(phase.cos());
        out.push(phase.sin());
    }
    for n in [1i64, 2, 4, 8] {
        out.push(u.coeff(n).norm_sqr());
    }
    let l2 = u.l2_norm_sq();
    out.push(l2);
    out.push(u.lp_integral(4) - 6.0 * a_beta * l2 + 3.0 * a_beta * a_beta);
    // int u^3 is the Gibbs log-density: conserved only jointly with the
    // H^1 seminorm, so the pair is the sharpest non-invariance probe
    out.push(u.lp_integral(3));
    out.push(u.sobolev_norm_sq(crate::field::SobolevIndex(1.0)));
    out
}

fn observable_names(panel: &[TestFunction]) -> Vec<String> {
    let mut names = Vec::new();
    for (j, _) in panel.iter().enumerate() {
        names.push(format!("char_re[{j}]"));
        names.push(format!("char_im[{j}]"));
    }
    for n in [1, 2, 4, 8] {
        names.push(format!("mode_energy[{n}]"));
    }
    names.push("int_u2".into());
    names.push("wick_u4".into());
    names.push("int_u3".into());
    names.push("h1_norm_sq".into());
    names
}

/// Default test-function panel: unit-norm single modes at n = 1, 2, 4.
pub fn default_panel(n_modes: usize) -> Vec<TestFunction> {
    [1usize, 2, 4]
        .iter()
        .filter(|&&n| n <= n_modes)
        .map(|&n| {
            TestFunction::single_mode(n_modes, n, Complex64::new(1.0, 0.0)).normalized()
        })
        .collect()
}

/// Flow-invariance experiment: draw a weighted ensemble, evolve every
/// sample, and compare the weighted observables across the flow with the
/// weights held fixed (`int u^2` and the Gibbs density are both conserved,
/// so the weights are flow-invariant).
///
/// `gibbs_weighted = false` keeps unit weights: the base Gaussian measure
/// alone, which is *not* invariant and serves as the negative control.
pub fn invariance_experiment(
    params: &MeasureParams,
    cfg: &FlowConfig,
    n: usize,
    stream: &GaussianStream,
    gibbs_weighted: bool,
) -> Result<InvarianceReport> {
    if params.power_p != 3 {
        return Err(LabError::Validation {
            field: "power_p",
            constraint: "the KdV-invariant Gibbs weight has p = 3".into(),
        });
    }
    if params.n_modes != cfg.n_modes {
        return Err(LabError::DimensionMismatch {
            left: params.n_modes,
            right: cfg.n_modes,
            context: "measure band-limit vs flow resolution",
        });
    }
    let ens = build_ensemble(params, n, stream)?;
    let log_weights = if gibbs_weighted {
        ens.effective_log_weights()
    } else {
        vec![0.0; ens.len()]
    };

    let panel = default_panel(params.n_modes);
    let a_beta = crate::wick::WickContext::new(*params).a_beta;

    let evolved: Vec<Option<SpectralField>> = ens
        .fields
        .par_iter()
        .map(|u| evolve(u, cfg).ok())
        .collect();
    let n_excluded = evolved.iter().filter(|e| e.is_none()).count();
    if n_excluded as f64 > 0.01 * n as f64 {
        return Err(LabError::Precondition(format!(
            "{n_excluded} of {n} trajectories aborted (> 1%); flow parameters unusable"
        )));
    }

    // drop excluded trajectories from both sides so the pairing is intact
    let mut before_rows = Vec::with_capacity(n - n_excluded);
    let mut after_rows = Vec::with_capacity(n - n_excluded);
    let mut kept_weights = Vec::with_capacity(n - n_excluded);
    for ((u0, u1), &lw) in ens.fields.iter().zip(&evolved).zip(&log_weights) {
        if let Some(u1) = u1 {
            before_rows.push(observables(u0, &panel, a_beta));
            after_rows.push(observables(u1, &panel, a_beta));
            kept_weights.push(lw);
        }
    }

    let names = observable_names(&panel);
    let pairs = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let b: Vec<f64> = before_rows.iter().map(|r| r[j]).collect();
            let a: Vec<f64> = after_rows.iter().map(|r| r[j]).collect();
            ObservablePair {
                name,
                before: Estimate::self_normalized(&b, &kept_weights),
                after: Estimate::self_normalized(&a, &kept_weights),
            }
        })
        .collect();
    Ok(InvarianceReport {
        pairs,
        n_evolved: n - n_excluded,
        n_excluded,
    })
}

/// The ensemble used by the invariance experiment, exposed for snapshot
/// dumping and diagnostics.
pub fn invariance_ensemble(
    params: &MeasureParams,
    n: usize,
    stream: &GaussianStream,
) -> Result<WeightedEnsemble> {
    build_ensemble(params, n, stream)
}
