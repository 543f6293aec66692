//! Experiment registry, configuration, and result emission.
//!
//! One config describes one experiment invocation; `run` executes it
//! deterministically and returns rows plus pass/fail checks. Emission is a
//! CSV with a fixed header and a JSON sidecar holding the full config, so a
//! result file is always reproducible from its sidecar alone.

use crate::error::{LabError, Result};
use crate::estimate::Estimate;
use crate::field::SpectralField;
use crate::kdv::{conservation_audit, evolve, invariance_experiment, FlowConfig};
use crate::measure::{
    build_ensemble, char_functional, chi2_tail_check, dyadic_tail_audit, exp_moment,
    moment_norm, normalizer_companion, normalizer_exact, tail_sweep, TestFunction,
};
use crate::params::{MeasureParams, Sign};
use crate::rng::GaussianStream;
use crate::sampler;
use crate::wick::{
    a_beta_by_summation, a_beta_closed_form, ii_a_second_moment_exact, moment_checks,
    SpectralConstants, WickContext,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Directory used when a config names no output path.
pub const OUTPUT_DIR_ENV: &str = "SPECMC_OUTPUT_DIR";

pub const CSV_HEADER: &str = "experiment,beta,N,K,p,n,value,stderr,ess,seed";

/// The beta grid every "uniformly in beta" claim is checked on.
pub fn default_beta_grid() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Constants,
    WickMoments,
    CharFunctionalSweep,
    Normalizer,
    Tail,
    Hypercontractivity,
    Chi2Tail,
    DyadicAudit,
    ExpMoment,
    KdvConservation,
    KdvInvariance,
    WhiteNoiseCoupling,
}

pub const ALL_EXPERIMENTS: [ExperimentId; 12] = [
    ExperimentId::Constants,
    ExperimentId::WickMoments,
    ExperimentId::CharFunctionalSweep,
    ExperimentId::Normalizer,
    ExperimentId::Tail,
    ExperimentId::Hypercontractivity,
    ExperimentId::Chi2Tail,
    ExperimentId::DyadicAudit,
    ExperimentId::ExpMoment,
    ExperimentId::KdvConservation,
    ExperimentId::KdvInvariance,
    ExperimentId::WhiteNoiseCoupling,
];

impl ExperimentId {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Constants => "constants",
            Self::WickMoments => "wick-moments",
            Self::CharFunctionalSweep => "char-functional-sweep",
            Self::Normalizer => "normalizer",
            Self::Tail => "tail",
            Self::Hypercontractivity => "hypercontractivity",
            Self::Chi2Tail => "chi2-tail",
            Self::DyadicAudit => "dyadic-audit",
            Self::ExpMoment => "exp-moment",
            Self::KdvConservation => "kdv-conservation",
            Self::KdvInvariance => "kdv-invariance",
            Self::WhiteNoiseCoupling => "white-noise-coupling",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        ALL_EXPERIMENTS
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| LabError::Validation {
                field: "experiment",
                constraint: format!("unknown experiment id {s:?}"),
            })
    }
}

/// Full description of one experiment invocation. Seeds are mandatory;
/// nothing falls back to wall-clock entropy.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    #[serde(default = "default_beta_grid")]
    pub beta_grid: Vec<f64>,
    /// Single-beta override; when set, the grid is ignored.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub n_modes: Option<usize>,
    #[serde(default = "default_cutoff_k")]
    pub cutoff_k: f64,
    #[serde(default = "default_power_p")]
    pub power_p: u32,
    #[serde(default)]
    pub defocusing: bool,
    #[serde(default)]
    pub n_samples: Option<usize>,
    /// Exponential-moment rate r.
    #[serde(default = "default_rate")]
    pub rate_r: f64,
    /// Tail-sweep thresholds.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_final: Option<f64>,
    /// Invariance experiment only: keep unit weights (the base Gaussian
    /// measure), which the flow is expected *not* to preserve.
    #[serde(default)]
    pub negative_control: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_cutoff_k() -> f64 {
    1.0
}
fn default_power_p() -> u32 {
    4
}
fn default_rate() -> f64 {
    1.0
}
fn default_lambdas() -> Vec<f64> {
    // quarter-decade ladder: deep enough to expose the stretched tail,
    // shallow enough that every point keeps nonzero hit counts at desk scale
    vec![1.0, 1.26, 1.59, 2.0, 2.52, 3.17]
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            beta_grid: default_beta_grid(),
            beta: None,
            n_modes: None,
            cutoff_k: default_cutoff_k(),
            power_p: default_power_p(),
            defocusing: false,
            n_samples: None,
            rate_r: default_rate(),
            lambdas: default_lambdas(),
            dt: None,
            t_final: None,
            negative_control: false,
            output_dir: None,
        }
    }

    pub fn betas(&self) -> Vec<f64> {
        match self.beta {
            Some(b) => vec![b],
            None => self.beta_grid.clone(),
        }
    }

    pub fn sign(&self) -> Sign {
        if self.defocusing {
            Sign::Defocusing
        } else {
            Sign::Focusing
        }
    }

    fn resolved_n_modes(&self, fallback: usize) -> usize {
        self.n_modes.unwrap_or(fallback)
    }

    fn resolved_samples(&self, fallback: usize) -> usize {
        self.n_samples.unwrap_or(fallback)
    }

    /// Apply `key = value` overrides from a config file body.
    pub fn apply_overrides(&self, text: &str) -> Result<Self> {
        let mut value = serde_json::to_value(self).map_err(LabError::Json)?;
        let map = value
            .as_object_mut()
            .expect("config serializes to an object");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| LabError::Validation {
                field: "config-file",
                constraint: format!("line {}: expected `key = value`", lineno + 1),
            })?;
            let key = key.trim();
            let val = val.trim();
            let parsed: serde_json::Value = match val {
                "true" => serde_json::Value::Bool(true),
                "false" => serde_json::Value::Bool(false),
                "null" | "none" => serde_json::Value::Null,
                _ => {
                    if let Ok(list) = serde_json::from_str(val) {
                        list
                    } else if let Ok(num) = serde_json::from_str(val) {
                        serde_json::Value::Number(num)
                    } else {
                        serde_json::Value::String(val.to_string())
                    }
                }
            };
            map.insert(key.to_string(), parsed);
        }
        serde_json::from_value(value).map_err(|e| LabError::Validation {
            field: "config-file",
            constraint: e.to_string(),
        })
    }
}

/// One CSV row. The `experiment` column carries `id/metric` so a single
/// file stays self-describing.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub experiment: String,
    pub beta: f64,
    pub n_modes: usize,
    pub cutoff_k: f64,
    pub power_p: u32,
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    pub ess: f64,
    pub seed: u64,
}

impl Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{:e},{},{:e},{},{},{:.17e},{:.17e},{:.17e},{}",
            self.experiment,
            self.beta,
            self.n_modes,
            self.cutoff_k,
            self.power_p,
            self.n,
            self.value,
            self.stderr,
            self.ess,
            self.seed,
        )
    }
}

/// One named pass/fail assertion of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emit {
    Json,
    Csv,
    Both,
}

impl FromStr for Emit {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "both" => Ok(Self::Both),
            other => Err(LabError::Validation {
                field: "emit",
                constraint: format!("expected json|csv|both, got {other:?}"),
            }),
        }
    }
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv());
            out.push('\n');
        }
        out
    }

    /// Write `<id>.csv` and/or the `<id>.json` sidecar into `dir`.
    pub fn write(&self, dir: &Path, emit: Emit) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(LabError::Io)?;
        let stem = self.config.experiment.as_str();
        let mut written = Vec::new();
        if emit != Emit::Json {
            let path = dir.join(format!("{stem}.csv"));
            std::fs::write(&path, self.csv()).map_err(LabError::Io)?;
            written.push(path);
        }
        if emit != Emit::Csv {
            let path = dir.join(format!("{stem}.json"));
            let sidecar = serde_json::json!({
                "config": self.config,
                "checks": self.checks,
                "passed": self.passed(),
            });
            let body = serde_json::to_string_pretty(&sidecar).map_err(LabError::Json)?;
            std::fs::write(&path, body).map_err(LabError::Io)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Execute one experiment. Deterministic: identical configs yield identical
/// outcomes byte for byte.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    // check measure preconditions up front, before any sampling, for every
    // experiment that consumes them (some also re-validate per case)
    if !matches!(
        config.experiment,
        ExperimentId::Constants | ExperimentId::Chi2Tail
    ) {
        for beta in config.betas() {
            MeasureParams::new(
                beta,
                config.cutoff_k,
                config.power_p,
                config.sign(),
                config.resolved_n_modes(1),
            )
            .validate()?;
        }
    }
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    match config.experiment {
        ExperimentId::Constants => {
            run_constants(config, &mut rows, &mut checks);
        }
        ExperimentId::Normalizer => run_normalizer(config, &mut rows, &mut checks)?,
        ExperimentId::WickMoments => run_wick_moments(config, &mut rows, &mut checks)?,
        ExperimentId::CharFunctionalSweep => run_char_sweep(config, &mut rows, &mut checks)?,
        ExperimentId::Tail => run_tail(config, &mut rows, &mut checks)?,
        ExperimentId::Hypercontractivity => {
            run_hypercontractivity(config, &mut rows, &mut checks)?
        }
        ExperimentId::Chi2Tail => run_chi2_tail(config, &mut rows, &mut checks)?,
        ExperimentId::DyadicAudit => run_dyadic_audit(config, &mut rows, &mut checks)?,
        ExperimentId::ExpMoment => run_exp_moment(config, &mut rows, &mut checks)?,
        ExperimentId::KdvConservation => run_kdv_conservation(config, &mut rows, &mut checks)?,
        ExperimentId::KdvInvariance => run_kdv_invariance(config, &mut rows, &mut checks)?,
        ExperimentId::WhiteNoiseCoupling => run_coupling(config, &mut rows, &mut checks),
    }
    Ok(RunOutcome {
        config: config.clone(),
        rows,
        checks,
    })
}

fn row(
    config: &ExperimentConfig,
    metric: &str,
    beta: f64,
    n_modes: usize,
    n: usize,
    est: &Estimate,
) -> Row {
    Row {
        experiment: format!("{}/{}", config.experiment, metric),
        beta,
        n_modes,
        cutoff_k: config.cutoff_k,
        power_p: config.power_p,
        n,
        value: est.value,
        stderr: est.stderr,
        ess: est.ess,
        seed: config.seed,
    }
}

fn scalar_row(config: &ExperimentConfig, metric: &str, beta: f64, n_modes: usize, v: f64) -> Row {
    row(
        config,
        metric,
        beta,
        n_modes,
        1,
        &Estimate {
            value: v,
            stderr: 0.0,
            ess: 1.0,
            n: 1,
        },
    )
}

// ---------------------------------------------------------------------------
// individual experiments
// ---------------------------------------------------------------------------

fn run_constants(config: &ExperimentConfig, rows: &mut Vec<Row>, checks: &mut Vec<Check>) {
    let beta_limit = 1e-8f64;
    let scaled = beta_limit.sqrt() * a_beta_closed_form(beta_limit);
    rows.push(scalar_row(config, "sqrt_beta_a", beta_limit, 0, scaled));
    checks.push(check(
        "a-small-beta-limit",
        (scaled - 0.5).abs() <= 1e-3,
        format!("sqrt(beta) a_beta = {scaled:.8} at beta = {beta_limit:e}, limit 1/2"),
    ));

    let beta_cmp = 1e-2;
    let closed = a_beta_closed_form(beta_cmp);
    let summed = a_beta_by_summation(beta_cmp);
    let rel = (closed - summed).abs() / closed.abs();
    rows.push(scalar_row(config, "a_closed", beta_cmp, 0, closed));
    rows.push(scalar_row(config, "a_summed", beta_cmp, 0, summed));
    checks.push(check(
        "a-closed-vs-summation",
        rel <= 1e-10,
        format!("relative difference {rel:.3e} at beta = {beta_cmp}"),
    ));

    for &beta in &config.betas() {
        let c = SpectralConstants::compute(beta, None);
        rows.push(scalar_row(config, "a_beta", beta, 0, c.a));
        rows.push(scalar_row(config, "b_beta", beta, 0, c.b));
        rows.push(scalar_row(config, "c_beta", beta, 0, c.c));
    }
}

fn run_normalizer(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let beta_small = 1e-6;
    let exact_small = normalizer_exact(beta_small)?;
    let limit = (1.5f64).exp();
    rows.push(scalar_row(config, "exact", beta_small, 0, exact_small));
    checks.push(check(
        "exact-small-beta",
        (exact_small / limit - 1.0).abs() <= 0.01,
        format!("Z({beta_small:e}) = {exact_small:.6}, limit e^1.5 = {limit:.6}"),
    ));

    let companion = normalizer_companion(beta_small);
    let companion_limit = (-0.75f64).exp();
    rows.push(scalar_row(config, "companion", beta_small, 0, companion));
    checks.push(check(
        "companion-small-beta",
        (companion / companion_limit - 1.0).abs() <= 0.01,
        format!("e^(-3 beta a^2) = {companion:.6}, limit e^(-3/4) = {companion_limit:.6}"),
    ));

    // MC oracle: mean of e^{6 beta a int u^2} over the base measure
    let beta_mc = config.beta.unwrap_or(1e-2);
    let n_modes = config.resolved_n_modes(4096);
    let n = config.resolved_samples(100_000);
    let a = a_beta_closed_form(beta_mc);
    let tilt = 6.0 * beta_mc * a;
    let params = MeasureParams::new(beta_mc, 1.0, 4, Sign::Focusing, n_modes);
    let stream = GaussianStream::new(config.seed, 0);
    let values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| (tilt * sampler::sample_mu_beta(&params, &stream, i).l2_norm_sq()).exp())
        .collect();
    let mc = Estimate::from_samples(&values);
    let exact_mc = normalizer_exact(beta_mc)?;
    rows.push(row(config, "mc", beta_mc, n_modes, n, &mc));
    rows.push(scalar_row(config, "exact_at_mc_beta", beta_mc, 0, exact_mc));
    let z = (mc.value - exact_mc).abs() / mc.stderr;
    checks.push(check(
        "exact-vs-mc",
        z <= 3.0,
        format!("closed form {exact_mc:.6}, MC {:.6} +- {:.6} ({z:.2} sigma)", mc.value, mc.stderr),
    ));
    Ok(())
}

fn run_wick_moments(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let n_modes = config.resolved_n_modes(2048);
    let n = config.resolved_samples(10_000);
    let mut scaled_m2 = Vec::new();
    for (bi, &beta) in config.betas().iter().enumerate() {
        let params = MeasureParams::new(beta, config.cutoff_k, 4, config.sign(), n_modes);
        let ctx = WickContext::new(params);
        let stream = GaussianStream::new(config.seed, bi as u32);
        let reports = (0..n as u64)
            .into_par_iter()
            .map(|i| ctx.report(&stream.draw_gaussians(n_modes, i), None))
            .collect::<Result<Vec<_>>>()?;

        // identity residual, relative to the magnitude of the terms
        let worst = reports
            .iter()
            .map(|r| {
                let scale = (12.0 * r.i1.abs()
                    + 6.0 * r.i2.abs()
                    + r.ii_a.abs()
                    + r.ii_b.abs()
                    + r.ii_c.abs())
                .max(r.wick_u4.abs());
                r.decomposition_residual().abs() / scale.max(1e-300)
            })
            .fold(0.0f64, f64::max);
        rows.push(scalar_row(config, "identity_residual", beta, n_modes, worst));
        checks.push(check(
            format!("wick-identity-beta-{beta:e}"),
            worst <= 1e-8,
            format!("worst relative residual {worst:.3e} over {n} samples"),
        ));

        let mc = moment_checks(&reports, &params);
        let z2 = mc.mean_wick_u2.abs() / mc.se_mean_wick_u2;
        let z4 = mc.mean_wick_u4.abs() / mc.se_mean_wick_u4;
        let zv = (mc.var_wick_u2 - mc.two_b_beta).abs() / mc.se_var_wick_u2;
        rows.push(row(
            config,
            "mean_wick_u2",
            beta,
            n_modes,
            n,
            &Estimate {
                value: mc.mean_wick_u2,
                stderr: mc.se_mean_wick_u2,
                ess: n as f64,
                n,
            },
        ));
        rows.push(row(
            config,
            "mean_wick_u4",
            beta,
            n_modes,
            n,
            &Estimate {
                value: mc.mean_wick_u4,
                stderr: mc.se_mean_wick_u4,
                ess: n as f64,
                n,
            },
        ));
        rows.push(row(
            config,
            "var_wick_u2",
            beta,
            n_modes,
            n,
            &Estimate {
                value: mc.var_wick_u2,
                stderr: mc.se_var_wick_u2,
                ess: n as f64,
                n,
            },
        ));
        rows.push(scalar_row(config, "two_b_beta", beta, n_modes, mc.two_b_beta));
        rows.push(row(
            config,
            "m2_wick_u4_scaled",
            beta,
            n_modes,
            n,
            &Estimate {
                value: mc.m2_wick_u4_scaled,
                stderr: mc.se_m2_wick_u4_scaled,
                ess: n as f64,
                n,
            },
        ));
        checks.push(check(
            format!("mean-wick-u2-beta-{beta:e}"),
            z2 <= 3.0,
            format!("{:.3e} +- {:.3e} ({z2:.2} sigma from 0)", mc.mean_wick_u2, mc.se_mean_wick_u2),
        ));
        checks.push(check(
            format!("mean-wick-u4-beta-{beta:e}"),
            z4 <= 3.0,
            format!("{:.3e} +- {:.3e} ({z4:.2} sigma from 0)", mc.mean_wick_u4, mc.se_mean_wick_u4),
        ));
        checks.push(check(
            format!("var-wick-u2-beta-{beta:e}"),
            zv <= 3.0,
            format!(
                "var {:.5e} vs 2 b_beta(N) {:.5e} ({zv:.2} sigma)",
                mc.var_wick_u2, mc.two_b_beta
            ),
        ));
        scaled_m2.push(mc.m2_wick_u4_scaled);
    }
    if scaled_m2.len() > 1 {
        let max = scaled_m2.iter().copied().fold(f64::MIN, f64::max);
        let min = scaled_m2.iter().copied().fold(f64::MAX, f64::min);
        checks.push(check(
            "m2-wick-u4-uniform",
            max / min <= 3.0,
            format!("beta^(3/2) E[(wick u4)^2] spans [{min:.4}, {max:.4}], ratio {:.2}", max / min),
        ));
    }
    Ok(())
}

fn run_char_sweep(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let n_modes = config.resolved_n_modes(2048);
    let n = config.resolved_samples(20_000);
    let limit = (-0.5f64).exp();
    let cases: [(&str, u32, Sign, f64); 3] = [
        ("p4-focusing", 4, Sign::Focusing, 1.0),
        ("p4-defocusing", 4, Sign::Defocusing, 1.0),
        ("p3", 3, Sign::Focusing, 1.0),
    ];
    // spread over modes 1 and 2: no single beta-tilde n^2 term can cancel
    // the quadratic tilt, so the error trend stays one-signed
    let mut f_coeffs = vec![Complex64::ZERO; n_modes];
    f_coeffs[0] = Complex64::new(1.0, 0.0);
    f_coeffs[1] = Complex64::new(1.0, 0.0);
    let f = TestFunction::new(f_coeffs).normalized();
    let mut substream = 0u32;
    for (label, p, sign, k) in cases {
        let mut errors = Vec::new();
        let mut stderrs = Vec::new();
        let betas = config.betas();
        for &beta in &betas {
            let params = MeasureParams::new(beta, k, p, sign, n_modes);
            let stream = GaussianStream::new(config.seed, substream);
            substream += 1;
            let ens = build_ensemble(&params, n, &stream)?;
            let est = char_functional(&ens, &f)?;
            let err = (est.value - Complex64::new(limit, 0.0)).norm();
            rows.push(Row {
                experiment: format!("{}/{label}", config.experiment),
                beta,
                n_modes,
                cutoff_k: k,
                power_p: p,
                n,
                value: est.value.re,
                stderr: est.stderr,
                ess: est.ess,
                seed: config.seed,
            });
            errors.push(err);
            stderrs.push(est.stderr);
            if (beta - 1e-3).abs() < 1e-12 {
                checks.push(check(
                    format!("{label}-limit"),
                    err <= 0.05 && est.ess >= 1e3,
                    format!("|estimate - e^(-1/2)| = {err:.4}, ESS = {:.0}", est.ess),
                ));
            }
        }
        // error non-increasing along decreasing beta, up to one stderr
        let monotone = errors.windows(2).zip(stderrs.windows(2)).all(|(e, s)| {
            e[1] <= e[0] + s[0].hypot(s[1])
        });
        checks.push(check(
            format!("{label}-error-trend"),
            monotone,
            format!("|error| along beta grid: {errors:.4?}"),
        ));
    }
    Ok(())
}

fn run_tail(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    for &lambda in &config.lambdas {
        if lambda < 1.0 {
            return Err(LabError::Precondition(format!(
                "tail experiments require lambda >= 1; got {lambda}"
            )));
        }
    }
    let beta = config.beta.unwrap_or(1e-2);
    let n_modes = config.resolved_n_modes(2048);
    let n = config.resolved_samples(400_000);
    let params = MeasureParams::new(beta, config.cutoff_k, 4, Sign::Focusing, n_modes);
    let stream = GaussianStream::new(config.seed, 0);
    let sweep = tail_sweep(&params, &config.lambdas, n, &stream)?;
    for rep in &sweep.reports {
        rows.push(Row {
            experiment: format!("{}/lambda-{}", config.experiment, rep.lambda),
            beta,
            n_modes,
            cutoff_k: config.cutoff_k,
            power_p: 4,
            n,
            value: rep.estimate.value,
            stderr: rep.estimate.stderr,
            ess: rep.estimate.ess,
            seed: config.seed,
        });
    }
    match (sweep.fitted_exponent, sweep.exponent_ci) {
        (Some(exp), Some((lo, hi))) => {
            rows.push(scalar_row(config, "fitted_exponent", beta, n_modes, exp));
            checks.push(check(
                "tail-exponent",
                lo >= 1.0,
                format!("fitted exponent {exp:.3}, 95% CI [{lo:.3}, {hi:.3}]"),
            ));
        }
        _ => checks.push(check(
            "tail-exponent",
            false,
            "too few usable sweep points to fit an exponent".into(),
        )),
    }
    Ok(())
}

fn run_hypercontractivity(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let n_modes = config.resolved_n_modes(2048);
    let n = config.resolved_samples(4_000);
    let qs = [2.0f64, 4.0, 6.0];
    let mut ratios = Vec::new();
    for (bi, &beta) in config.betas().iter().enumerate() {
        let params = MeasureParams::new(beta, config.cutoff_k, 4, Sign::Focusing, n_modes);
        let ctx = WickContext::new(params);
        let stream = GaussianStream::new(config.seed, bi as u32);
        let f_samples = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                ctx.report(&stream.draw_gaussians(n_modes, i), Some(n_modes))
                    .map(|r| r.f_beta_m.expect("M was supplied"))
            })
            .collect::<Result<Vec<f64>>>()?;
        for (qi, &q) in qs.iter().enumerate() {
            let est = moment_norm(&f_samples, q, config.seed ^ (qi as u64) << 8 ^ bi as u64)?;
            let ratio = est.value / (q * q * beta.powf(0.25));
            rows.push(Row {
                experiment: format!("{}/q-{}", config.experiment, q),
                beta,
                n_modes,
                cutoff_k: config.cutoff_k,
                power_p: 4,
                n,
                value: est.value,
                stderr: est.stderr,
                ess: est.ess,
                seed: config.seed,
            });
            ratios.push(ratio);
            if q == 2.0 {
                let exact = beta * ii_a_second_moment_exact(beta, n_modes).sqrt();
                let z = (est.value - exact).abs() / est.stderr;
                rows.push(scalar_row(config, "q2_exact", beta, n_modes, exact));
                checks.push(check(
                    format!("q2-oracle-beta-{beta:e}"),
                    z <= 3.0,
                    format!("MC {:.5e} vs exact {exact:.5e} ({z:.2} sigma)", est.value),
                ));
            }
        }
    }
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    checks.push(check(
        "growth-uniformity",
        max / min <= 3.0,
        format!("||F||_q / (q^2 beta^(1/4)) spans [{min:.4}, {max:.4}], ratio {:.2}", max / min),
    ));
    Ok(())
}

fn run_chi2_tail(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let mut all_hold = true;
    let mut worst_margin = f64::MIN;
    for m in 1..=128usize {
        for mult in [3.0f64, 4.0, 6.0] {
            let r = mult * (m as f64).sqrt();
            let t = chi2_tail_check(m, r)?;
            let margin = t.ln_exact - t.ln_bound; // must stay <= 0
            all_hold &= t.bound_holds();
            if margin > worst_margin {
                worst_margin = margin;
            }
            if m <= 4 || m == 128 {
                rows.push(scalar_row(
                    config,
                    &format!("ln_exact_m{m}_r{mult}"),
                    0.0,
                    m,
                    t.ln_exact,
                ));
            }
        }
    }
    checks.push(check(
        "chi2-bound-grid",
        all_hold,
        format!("worst ln(exact) - ln(bound) = {worst_margin:.3} over the (M, R) grid"),
    ));
    Ok(())
}

fn run_dyadic_audit(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    // projected-tail bound regime
    let beta = config.beta.unwrap_or(1e-2);
    let n_modes = config.resolved_n_modes(2048);
    let n = config.resolved_samples(50_000);
    let m = 128.min(n_modes / 2).max(1);
    let lambda = config.lambdas.first().copied().unwrap_or(1.0);
    let params = MeasureParams::new(beta, config.cutoff_k, 4, Sign::Focusing, n_modes);
    let stream = GaussianStream::new(config.seed, 0);
    let audit = dyadic_tail_audit(&params, m, lambda, n, &stream)?;
    rows.push(Row {
        experiment: format!("{}/projected-tail", config.experiment),
        beta,
        n_modes,
        cutoff_k: config.cutoff_k,
        power_p: 4,
        n,
        value: audit.tail.estimate.value,
        stderr: audit.tail.estimate.stderr,
        ess: audit.tail.estimate.ess,
        seed: config.seed,
    });
    rows.push(scalar_row(
        config,
        "analytic_exponent",
        beta,
        m,
        audit.analytic_exponent,
    ));
    checks.push(check(
        "block-norm-oracle",
        audit.block_max_discrepancy <= 1e-10,
        format!("worst block-norm relative discrepancy {:.3e}", audit.block_max_discrepancy),
    ));

    // beta = 1 integrability: exp-moment stable under band-limit doubling
    let mut prev: Option<Estimate> = None;
    let mut stable = true;
    let mut details = Vec::new();
    for (i, &nm) in [512usize, 1024, 2048].iter().enumerate() {
        let p1 = MeasureParams::new(1.0, 1.0, 4, Sign::Focusing, nm);
        let stream = GaussianStream::new(config.seed, 16 + i as u32);
        let est = exp_moment(&p1, config.rate_r, n, &stream)?;
        rows.push(Row {
            experiment: format!("{}/beta1-N{nm}", config.experiment),
            beta: 1.0,
            n_modes: nm,
            cutoff_k: 1.0,
            power_p: 4,
            n,
            value: est.value,
            stderr: est.stderr,
            ess: est.ess,
            seed: config.seed,
        });
        if let Some(p) = prev {
            let z = (est.value - p.value).abs() / p.stderr.hypot(est.stderr);
            stable &= z <= 3.0;
            details.push(format!("{:.5} -> {:.5} ({z:.2} sigma)", p.value, est.value));
        }
        prev = Some(est);
    }
    checks.push(check(
        "beta1-doubling-stability",
        stable,
        details.join(", "),
    ));
    Ok(())
}

fn run_exp_moment(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let n_modes = config.resolved_n_modes(2048);
    let n = config.resolved_samples(50_000);
    let mut substream = 0u32;
    for p in [3u32, 4] {
        let mut values = Vec::new();
        for &beta in &config.betas() {
            let params = MeasureParams::new(beta, config.cutoff_k, p, Sign::Focusing, n_modes);
            let stream = GaussianStream::new(config.seed, substream);
            substream += 1;
            let est = exp_moment(&params, config.rate_r, n, &stream)?;
            rows.push(Row {
                experiment: format!("{}/p{p}", config.experiment),
                beta,
                n_modes,
                cutoff_k: config.cutoff_k,
                power_p: p,
                n,
                value: est.value,
                stderr: est.stderr,
                ess: est.ess,
                seed: config.seed,
            });
            values.push(est.value);
        }
        let max = values.iter().copied().fold(f64::MIN, f64::max);
        let min = values.iter().copied().fold(f64::MAX, f64::min);
        checks.push(check(
            format!("uniform-bound-p{p}"),
            max / min <= 3.0,
            format!("estimates span [{min:.5}, {max:.5}], ratio {:.2}", max / min),
        ));
    }
    Ok(())
}

/// Deterministic low-frequency profile used by the conservation audit.
fn conservation_profile(n_modes: usize, seed: u64) -> SpectralField {
    let g = GaussianStream::new(seed, 0).draw_gaussians(8, 0);
    let mut coeffs = vec![Complex64::ZERO; n_modes];
    for k in 0..8usize.min(n_modes) {
        coeffs[k] = 0.5 * g.entries[k] / (1.0 + k as f64);
    }
    SpectralField::new(coeffs, 0.0)
}

fn run_kdv_conservation(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let n_modes = config.resolved_n_modes(256);
    let dt = config.dt.unwrap_or(1.25e-6);
    let t = config.t_final.unwrap_or(1.0);
    let u0 = conservation_profile(n_modes, config.seed);
    let cfg = FlowConfig::new(n_modes, dt, t)?;
    let (mean_drift, l2_drift) = conservation_audit(&u0, &cfg)?;
    rows.push(scalar_row(config, "mean_drift", 0.0, n_modes, mean_drift));
    rows.push(scalar_row(config, "l2_drift", 0.0, n_modes, l2_drift));
    checks.push(check(
        "l2-conservation",
        l2_drift <= 1e-6,
        format!("relative int u^2 drift {l2_drift:.3e} over t = {t} at N = {n_modes}"),
    ));

    // time reversal on a fully resolved small system
    let p = MeasureParams::new(1.0, 1.0, 4, Sign::Focusing, 16);
    let v0 = sampler::sample_mu_beta(&p, &GaussianStream::new(config.seed, 1), 0);
    let rcfg = FlowConfig::new(16, 1.5e-6, 0.01)?;
    let back = evolve(&evolve(&v0, &rcfg)?, &rcfg.reversed())?;
    let num: f64 = v0
        .coeffs()
        .iter()
        .zip(back.coeffs())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let residual = num / v0.l2_norm_sq().sqrt();
    rows.push(scalar_row(config, "reversal_residual", 1.0, 16, residual));
    checks.push(check(
        "time-reversal",
        residual <= 1e-8,
        format!("relative forward-backward residual {residual:.3e}"),
    ));
    Ok(())
}

fn run_kdv_invariance(
    config: &ExperimentConfig,
    rows: &mut Vec<Row>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let beta = config.beta.unwrap_or(1e-1);
    let n_modes = config.resolved_n_modes(8);
    let n = config.resolved_samples(100_000);
    let dt = config.dt.unwrap_or(2e-5);
    let t = config.t_final.unwrap_or(0.05);
    // the flow-invariant Gibbs family has p = 3
    let params = MeasureParams::new(beta, config.cutoff_k, 3, Sign::Defocusing, n_modes);
    let cfg = FlowConfig::new(n_modes, dt, t)?;
    let stream = GaussianStream::new(config.seed, 0);
    let weighted = !config.negative_control;
    let report = invariance_experiment(&params, &cfg, n, &stream, weighted)?;
    for pair in &report.pairs {
        rows.push(Row {
            experiment: format!("{}/{}-drift", config.experiment, pair.name),
            beta,
            n_modes,
            cutoff_k: config.cutoff_k,
            power_p: 3,
            n: report.n_evolved,
            value: pair.after.value - pair.before.value,
            stderr: pair.before.stderr.hypot(pair.after.stderr),
            ess: pair.before.ess,
            seed: config.seed,
        });
    }
    let max_z = report.max_discrepancy_sigmas();
    rows.push(scalar_row(config, "max_discrepancy_sigmas", beta, n_modes, max_z));
    if weighted {
        checks.push(check(
            "gibbs-invariance",
            report.all_within(3.0),
            format!("max observable discrepancy {max_z:.2} sigma ({} evolved)", report.n_evolved),
        ));
    } else {
        checks.push(check(
            "negative-control-detects-drift",
            max_z > 3.0,
            format!("base-measure ensemble moved by {max_z:.2} sigma (expected > 3)"),
        ));
    }
    Ok(())
}

fn run_coupling(config: &ExperimentConfig, rows: &mut Vec<Row>, checks: &mut Vec<Check>) {
    let n_modes = 64usize;
    let betas = if config.beta_grid == default_beta_grid() {
        vec![1e-2, 1e-4, 1e-6]
    } else {
        config.beta_grid.clone()
    };
    let g = GaussianStream::new(config.seed, 0).draw_gaussians(n_modes, 0);
    let mut distances = Vec::new();
    for &beta in &betas {
        let params = MeasureParams::new(beta, 1.0, 4, Sign::Focusing, n_modes);
        let u = sampler::mu_beta_field(&g, &params);
        let d = (1..=n_modes as i64)
            .map(|k| (u.coeff(k) - g.entry(k)).norm())
            .fold(0.0f64, f64::max);
        rows.push(scalar_row(config, "sup_distance", beta, n_modes, d));
        distances.push(d);
    }
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    checks.push(check(
        "coupling-monotone",
        monotone,
        format!("sup-mode distances along the beta ladder: {distances:?}"),
    ));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_id_round_trip() {
        for id in ALL_EXPERIMENTS {
            assert_eq!(ExperimentId::from_str(id.as_str()).unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{id}\""));
        }
        assert!(ExperimentId::from_str("bogus").is_err());
    }

    #[test]
    fn config_overrides_parse() {
        let base = ExperimentConfig::new(ExperimentId::Tail, 7);
        let patched = base
            .apply_overrides("beta = 0.5\nn_samples = 123  # comment\nnegative_control = true\nlambdas = [1, 3]\n")
            .unwrap();
        assert_eq!(patched.beta, Some(0.5));
        assert_eq!(patched.n_samples, Some(123));
        assert!(patched.negative_control);
        assert_eq!(patched.lambdas, vec![1.0, 3.0]);
        // unknown keys refuse
        assert!(base.apply_overrides("nonsense = 1\n").is_err());
    }

    #[test]
    fn cutoff_constraint_cited_in_validation() {
        let cfg = ExperimentConfig {
            cutoff_k: 0.4,
            beta: Some(1e-2),
            n_samples: Some(10),
            ..ExperimentConfig::new(ExperimentId::Tail, 1)
        };
        let err = run(&cfg).unwrap_err().to_string();
        assert!(err.contains("K > 1/2"), "{err}");
    }

    #[test]
    fn constants_runs_and_passes() {
        let cfg = ExperimentConfig::new(ExperimentId::Constants, 3);
        let out = run(&cfg).unwrap();
        assert!(out.passed(), "{:?}", out.checks);
        assert!(out.csv().starts_with(CSV_HEADER));
    }

    #[test]
    fn coupling_runs_and_passes() {
        let cfg = ExperimentConfig::new(ExperimentId::WhiteNoiseCoupling, 11);
        let out = run(&cfg).unwrap();
        assert!(out.passed(), "{:?}", out.checks);
        assert_eq!(out.rows.len(), 3);
    }

    #[test]
    fn identical_configs_identical_csv() {
        let mut cfg = ExperimentConfig::new(ExperimentId::WickMoments, 5);
        cfg.n_modes = Some(64);
        cfg.n_samples = Some(200);
        cfg.beta = Some(1e-2);
        let a = run(&cfg).unwrap().csv();
        let b = run(&cfg).unwrap().csv();
        assert_eq!(a, b);
        let mut other = cfg.clone();
        other.seed = 6;
        assert_ne!(a, run(&other).unwrap().csv());
    }

    #[test]
    fn write_emits_requested_files() {
        let dir = std::env::temp_dir().join(format!("specmc-harness-{}", std::process::id()));
        let cfg = ExperimentConfig::new(ExperimentId::Constants, 3);
        let out = run(&cfg).unwrap();
        let files = out.write(&dir, Emit::Both).unwrap();
        assert_eq!(files.len(), 2);
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&files[1]).unwrap()).unwrap();
        assert_eq!(sidecar["config"]["seed"], 3);
        assert_eq!(sidecar["passed"], true);
        std::fs::remove_dir_all(&dir).ok();
    }
}
