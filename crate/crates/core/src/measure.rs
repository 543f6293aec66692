//! Importance-sampled Gibbs ensembles and the estimators built on them:
//! characteristic functionals, closed-form normalizers, tail probabilities,
//! moment norms, exponential moments, and the dyadic tail audit.
//!
//! The Gibbs measure is never sampled directly. An ensemble is drawn from
//! the Gaussian base measure, each sample carries the log weight
//! `sigma * beta * int u^p` and the indicator of the `L^2` cutoff, and all
//! estimators are self-normalized ratios, so the partition function never
//! appears.

use crate::error::{LabError, Result};
use crate::estimate::{ComplexEstimate, Estimate};
use crate::field::{Projection, SpectralField};
use crate::kahan::{kahan_sum, StreamingLogSumExp};
use crate::params::MeasureParams;
use crate::rng::GaussianStream;
use crate::sampler;
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

/// Base-measure samples with their Gibbs log weights and cutoff indicators.
pub struct WeightedEnsemble {
    pub fields: Vec<SpectralField>,
    /// `sigma * beta * int u^p` per sample; the cutoff lives in `indicators`.
    pub log_weights: Vec<f64>,
    pub indicators: Vec<bool>,
    pub params: MeasureParams,
}

impl WeightedEnsemble {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Log weights with cut-off samples sent to negative infinity.
    pub fn effective_log_weights(&self) -> Vec<f64> {
        self.log_weights
            .iter()
            .zip(&self.indicators)
            .map(|(&lw, &ind)| if ind { lw } else { f64::NEG_INFINITY })
            .collect()
    }

    pub fn acceptance_fraction(&self) -> f64 {
        self.indicators.iter().filter(|&&b| b).count() as f64 / self.len() as f64
    }

    /// `(sum w)^2 / sum w^2` over the effective weights.
    pub fn ess(&self) -> f64 {
        let lw = self.effective_log_weights();
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return 0.0;
        }
        let s1 = kahan_sum(lw.iter().map(|&x| (x - max).exp()));
        let s2 = kahan_sum(lw.iter().map(|&x| (2.0 * (x - max)).exp()));
        s1 * s1 / s2
    }

    fn check_not_degenerate(&self) -> Result<()> {
        if self.indicators.iter().any(|&b| b) {
            Ok(())
        } else {
            Err(LabError::DegenerateEnsemble { n: self.len() })
        }
    }
}

/// Draw `n` samples from the base measure and attach Gibbs weights.
pub fn build_ensemble(
    params: &MeasureParams,
    n: usize,
    stream: &GaussianStream,
) -> Result<WeightedEnsemble> {
    params.validate()?;
    if n == 0 {
        return Err(LabError::Precondition("ensemble size must be >= 1".into()));
    }
    let threshold = params.cutoff_threshold();
    let sigma = params.sign.factor();
    let triples: Vec<(SpectralField, f64, bool)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let field = sampler::sample_mu_beta(params, stream, i);
            let lw = sigma * params.beta * field.lp_integral(params.power_p);
            let ind = !params.has_cutoff() || field.l2_norm_sq() <= threshold;
            (field, lw, ind)
        })
        .collect();
    let mut fields = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    let mut indicators = Vec::with_capacity(n);
    for (f, lw, ind) in triples {
        fields.push(f);
        log_weights.push(lw);
        indicators.push(ind);
    }
    let ens = WeightedEnsemble {
        fields,
        log_weights,
        indicators,
        params: *params,
    };
    ens.check_not_degenerate()?;
    Ok(ens)
}

/// Same samples with unit weights and no cutoff: the base measure itself.
pub fn unweighted_ensemble(
    params: &MeasureParams,
    n: usize,
    stream: &GaussianStream,
) -> Result<WeightedEnsemble> {
    let mut ens = build_ensemble(params, n, stream)?;
    ens.log_weights.iter_mut().for_each(|w| *w = 0.0);
    ens.indicators.iter_mut().for_each(|b| *b = true);
    Ok(ens)
}

/// A smooth mean-zero real test function, finitely supported in frequency.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub field: SpectralField,
    pub norm_sq: f64,
}

impl TestFunction {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let field = SpectralField::new(coeffs, 0.0);
        let norm_sq = field.l2_norm_sq();
        Self { field, norm_sq }
    }

    pub fn zero(n_modes: usize) -> Self {
        Self::new(vec![Complex64::ZERO; n_modes])
    }

    /// `f_hat(n) = amplitude` at one frequency, zero elsewhere.
    pub fn single_mode(n_modes: usize, n: usize, amplitude: Complex64) -> Self {
        assert!((1..=n_modes).contains(&n));
        let mut coeffs = vec![Complex64::ZERO; n_modes];
        coeffs[n - 1] = amplitude;
        Self::new(coeffs)
    }

    /// Rescaled to `norm_sq = 1`.
    pub fn normalized(mut self) -> Self {
        assert!(self.norm_sq > 0.0);
        let s = 1.0 / self.norm_sq.sqrt();
        let coeffs = self.field.coeffs().iter().map(|c| c * s).collect();
        self.field = SpectralField::new(coeffs, 0.0);
        self.norm_sq = 1.0;
        self
    }

    /// Largest frequency with a nonzero coefficient (0 for the zero
    /// function).
    pub fn max_frequency(&self) -> usize {
        self.field
            .coeffs()
            .iter()
            .rposition(|c| *c != Complex64::ZERO)
            .map_or(0, |i| i + 1)
    }
}

/// Self-normalized estimate of `E[e^{i <f, u>}]` under the weighted measure.
pub fn char_functional(ens: &WeightedEnsemble, f: &TestFunction) -> Result<ComplexEstimate> {
    if f.max_frequency() > ens.params.n_modes {
        return Err(LabError::DimensionMismatch {
            left: f.max_frequency(),
            right: ens.params.n_modes,
            context: "test function support vs ensemble band-limit",
        });
    }
    ens.check_not_degenerate()?;
    let values: Vec<Complex64> = ens
        .fields
        .iter()
        .map(|u| Complex64::new(0.0, u.pair(&f.field)).exp())
        .collect();
    Ok(ComplexEstimate::self_normalized(
        &values,
        &ens.effective_log_weights(),
    ))
}

/// Closed-form Gaussian characteristic functional
/// `exp(-1/2 sum_{n != 0} |f_hat|^2 / (1 - tilt + bt n^2))`; `tilt = 0` is
/// the base measure, `tilt = 12 beta a_beta` the tilted one.
pub fn gaussian_char_closed_form(f: &TestFunction, params: &MeasureParams, tilt: f64) -> f64 {
    let bt = params.beta_tilde();
    let s = kahan_sum(f.field.coeffs().iter().enumerate().map(|(i, c)| {
        let n = (i + 1) as f64;
        c.norm_sqr() / (1.0 - tilt + bt * n * n)
    }));
    (-s).exp()
}

fn ln_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2
}

/// `E[e^{6 beta a_beta int u^2}]` under the base measure, in closed form:
/// the ratio `[sinh(pi t)/(pi t)] / [sinh(pi s t)/(pi s t)]` with
/// `t = bt^{-1/2}` and `s = sqrt(1 - 12 beta a_beta)`, evaluated through
/// log-sinh differences so large `t` never overflows.
pub fn normalizer_exact(beta: f64) -> Result<f64> {
    let a = crate::wick::a_beta_closed_form(beta);
    let tilt = 12.0 * beta * a;
    if tilt >= 1.0 {
        return Err(LabError::IllDefinedMeasure { value: tilt });
    }
    let bt = 4.0 * std::f64::consts::PI.powi(2) * beta;
    let t = bt.powf(-0.5);
    let s = (1.0 - tilt).sqrt();
    let pi = std::f64::consts::PI;
    let ln_z = ln_sinh(pi * t) - (pi * t).ln() - ln_sinh(pi * s * t) + (pi * s * t).ln();
    Ok(ln_z.exp())
}

/// The companion factor `e^{-3 beta a_beta^2}` (limit `e^{-3/4}`).
pub fn normalizer_companion(beta: f64) -> f64 {
    let a = crate::wick::a_beta_closed_form(beta);
    (-3.0 * beta * a * a).exp()
}

/// One point of a tail-probability experiment.
#[derive(Debug, Clone, Copy)]
pub struct TailReport {
    pub lambda: f64,
    pub estimate: Estimate,
    pub hits: usize,
    /// 95% upper confidence bound; the rule of three `3/n` when `hits = 0`.
    pub upper_bound_95: f64,
}

fn binomial_report(lambda: f64, hits: usize, n: usize) -> TailReport {
    let nf = n as f64;
    let p = hits as f64 / nf;
    let stderr = (p * (1.0 - p) / nf).sqrt();
    let upper = if hits == 0 { 3.0 / nf } else { p + 1.96 * stderr };
    TailReport {
        lambda,
        estimate: Estimate {
            value: p,
            stderr,
            ess: nf,
            n,
        },
        hits,
        upper_bound_95: upper,
    }
}

/// Plain MC estimate of the joint event
/// `{beta ||u||_{L^4}^4 > lambda, int u^2 <= K beta^{-1/2}}` under the base
/// measure. Streams samples; nothing is retained.
pub fn tail_probability(
    params: &MeasureParams,
    lambda: f64,
    n: usize,
    stream: &GaussianStream,
) -> Result<TailReport> {
    params.validate()?;
    if lambda < 0.0 {
        return Err(LabError::Precondition("lambda must be nonnegative".into()));
    }
    let threshold = params.cutoff_threshold();
    let hits: usize = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let u = sampler::sample_mu_beta(params, stream, i);
            let hit = params.beta * u.lp_integral(4) > lambda && u.l2_norm_sq() <= threshold;
            usize::from(hit)
        })
        .sum();
    Ok(binomial_report(lambda, hits, n))
}

/// A lambda sweep sharing one sample set, with the fitted tail exponent.
#[derive(Debug, Clone)]
pub struct TailSweep {
    pub reports: Vec<TailReport>,
    /// Least-squares slope of `ln(-ln P)` against `ln lambda` over the
    /// points with `0 < P < 1`; the empirical `1 + delta`.
    pub fitted_exponent: Option<f64>,
    /// 95% confidence interval of the slope (normal approximation).
    pub exponent_ci: Option<(f64, f64)>,
}

pub fn tail_sweep(
    params: &MeasureParams,
    lambdas: &[f64],
    n: usize,
    stream: &GaussianStream,
) -> Result<TailSweep> {
    params.validate()?;
    if lambdas.is_empty() || lambdas.iter().any(|&l| l <= 0.0) {
        return Err(LabError::Precondition(
            "tail sweep needs positive lambdas".into(),
        ));
    }
    let threshold = params.cutoff_threshold();
    let hit_counts: Vec<usize> = (0..n as u64)
        .into_par_iter()
        .fold(
            || vec![0usize; lambdas.len()],
            |mut acc, i| {
                let u = sampler::sample_mu_beta(params, stream, i);
                if u.l2_norm_sq() <= threshold {
                    let v = params.beta * u.lp_integral(4);
                    for (slot, &l) in acc.iter_mut().zip(lambdas) {
                        *slot += usize::from(v > l);
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0usize; lambdas.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let reports: Vec<TailReport> = lambdas
        .iter()
        .zip(&hit_counts)
        .map(|(&l, &h)| binomial_report(l, h, n))
        .collect();

    // fit ln(-ln P) ~ slope * ln(lambda) + intercept
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.hits > 0 && r.estimate.value < 1.0)
        .map(|r| (r.lambda.ln(), (-r.estimate.value.ln()).ln()))
        .collect();
    let (fitted_exponent, exponent_ci) = if pts.len() >= 3 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let rss: f64 = pts
            .iter()
            .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
            .sum();
        let se = if m > 2.0 {
            (rss / (m - 2.0) / sxx).sqrt()
        } else {
            0.0
        };
        (
            Some(slope),
            Some((slope - 1.96 * se, slope + 1.96 * se)),
        )
    } else {
        (None, None)
    };
    Ok(TailSweep {
        reports,
        fitted_exponent,
        exponent_ci,
    })
}

/// Empirical `(E|F|^q)^{1/q}` with bootstrap stderr.
pub fn moment_norm(f_samples: &[f64], q: f64, bootstrap_seed: u64) -> Result<Estimate> {
    if q < 2.0 {
        return Err(LabError::Precondition("moment norm needs q >= 2".into()));
    }
    if f_samples.is_empty() {
        return Err(LabError::Precondition("empty sample set".into()));
    }
    let n = f_samples.len();
    let nf = n as f64;
    let powers: Vec<f64> = f_samples.iter().map(|&f| f.abs().powf(q)).collect();
    let value = (kahan_sum(powers.iter().copied()) / nf).powf(1.0 / q);

    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(bootstrap_seed);
    let replicates = 200;
    let mut stats = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += powers[rng.random_range(0..n)];
        }
        stats.push((acc / nf).powf(1.0 / q));
    }
    let mean = kahan_sum(stats.iter().copied()) / replicates as f64;
    let stderr = (kahan_sum(stats.iter().map(|s| (s - mean).powi(2)))
        / (replicates as f64 - 1.0))
        .sqrt();
    Ok(Estimate {
        value,
        stderr,
        ess: nf,
        n,
    })
}

/// MC estimate of `E[1_{cutoff} e^{r sigma beta int u^p}]` under the base
/// measure, accumulated in log space so no weight magnitude can overflow the
/// accumulator.
pub fn exp_moment(
    params: &MeasureParams,
    r: f64,
    n: usize,
    stream: &GaussianStream,
) -> Result<Estimate> {
    params.validate()?;
    if r < 0.0 {
        return Err(LabError::Precondition("rate r must be nonnegative".into()));
    }
    let threshold = params.cutoff_threshold();
    let sigma = params.sign.factor();
    let (s1, s2) = (0..n as u64)
        .into_par_iter()
        .fold(
            || (StreamingLogSumExp::new(), StreamingLogSumExp::new()),
            |(mut s1, mut s2), i| {
                let u = sampler::sample_mu_beta(params, stream, i);
                if !params.has_cutoff() || u.l2_norm_sq() <= threshold {
                    let l = r * sigma * params.beta * u.lp_integral(params.power_p);
                    s1.add(l);
                    s2.add(2.0 * l);
                }
                (s1, s2)
            },
        )
        .reduce(
            || (StreamingLogSumExp::new(), StreamingLogSumExp::new()),
            |(mut a1, mut a2), (b1, b2)| {
                if b1.value().is_finite() {
                    a1.add(b1.value());
                }
                if b2.value().is_finite() {
                    a2.add(b2.value());
                }
                (a1, a2)
            },
        );
    let nf = n as f64;
    let mean = (s1.value() - nf.ln()).exp();
    let m2 = (s2.value() - nf.ln()).exp();
    let var = (m2 - mean * mean).max(0.0);
    Ok(Estimate {
        value: mean,
        stderr: (var / nf).sqrt(),
        ess: nf,
        n,
    })
}

/// Log of the regularized upper incomplete gamma `Q(a, x)` for `x > a + 1`,
/// via the Legendre continued fraction (modified Lentz). Stays finite far
/// past the point where `Q` itself underflows.
pub fn ln_gamma_q(a: f64, x: f64) -> f64 {
    assert!(x > a + 1.0, "continued fraction needs x > a + 1");
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    -x + a * x.ln() - ln_gamma(a) + h.ln()
}

/// The chi-square large-deviation check: exact tail of
/// `P[(sum_{n<=M} g_n^2)^{1/2} >= R]` against the bound `e^{-R^2/4}`,
/// claimed for `R >= 3 sqrt(M)`.
#[derive(Debug, Clone, Copy)]
pub struct Chi2Tail {
    pub m: usize,
    pub r: f64,
    pub ln_exact: f64,
    /// `exp(ln_exact)`; underflows to zero for extreme tails.
    pub exact: f64,
    pub ln_bound: f64,
    pub bound: f64,
}

impl Chi2Tail {
    pub fn bound_holds(&self) -> bool {
        self.ln_exact <= self.ln_bound
    }
}

pub fn chi2_tail_check(m: usize, r: f64) -> Result<Chi2Tail> {
    if m == 0 {
        return Err(LabError::Precondition("chi-square needs M >= 1".into()));
    }
    if r < 3.0 * (m as f64).sqrt() {
        return Err(LabError::Precondition(format!(
            "bound claimed only for R >= 3 sqrt(M); got R = {r}, M = {m}"
        )));
    }
    let ln_exact = ln_gamma_q(m as f64 / 2.0, r * r / 2.0);
    let ln_bound = -r * r / 4.0;
    Ok(Chi2Tail {
        m,
        r,
        ln_exact,
        exact: ln_exact.exp(),
        ln_bound,
        bound: ln_bound.exp(),
    })
}

/// Projected-tail audit: the event `{beta ||P_{>M} u||_{L^p}^p > lambda}`
/// compared against the claimed stretched-exponential rate, plus a direct
/// cross-check of the dyadic block norms used in its proof.
#[derive(Debug, Clone)]
pub struct DyadicAuditReport {
    pub m: usize,
    pub tail: TailReport,
    /// `lambda^{2/p} beta^{1-2/p} M^{2/p+1}`, the claimed decay exponent up
    /// to the unknown constants.
    pub analytic_exponent: f64,
    /// Worst relative disagreement between projected block norms and their
    /// direct coefficient sums, over the probe samples.
    pub block_max_discrepancy: f64,
}

pub fn dyadic_tail_audit(
    params: &MeasureParams,
    m: usize,
    lambda: f64,
    n: usize,
    stream: &GaussianStream,
) -> Result<DyadicAuditReport> {
    params.validate()?;
    let beta = params.beta;
    let p = params.power_p as f64;
    let m_min = beta.powf(-0.5).max(beta.powf(-p / 2.0 + 1.0));
    if (m as f64) < m_min {
        return Err(LabError::Precondition(format!(
            "M = {m} below the frequency floor {m_min:.1}; the bound is not claimed there"
        )));
    }
    if m >= params.n_modes {
        return Err(LabError::Precondition(
            "projection cutoff M must sit below the band-limit N".into(),
        ));
    }
    if lambda <= 0.0 {
        return Err(LabError::Precondition("lambda must be positive".into()));
    }

    let hits: usize = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let u = sampler::sample_mu_beta(params, stream, i);
            let tail_part = u.project(Projection::Above(m));
            usize::from(beta * tail_part.lp_integral(params.power_p) > lambda)
        })
        .sum();
    let tail = binomial_report(lambda, hits, n);

    // block-norm oracle on a few probe samples
    let bt = params.beta_tilde();
    let probes = n.min(8) as u64;
    let mut worst = 0.0f64;
    for i in 0..probes {
        let g = stream.draw_gaussians(params.n_modes, i);
        let u = sampler::mu_beta_field(&g, params);
        for block in SpectralField::dyadic_blocks(params.n_modes, m) {
            let via_projection = u.project(Projection::Dyadic(block)).l2_norm_sq();
            let direct = 2.0
                * kahan_sum(
                    (block.lower() + 1..=block.upper().min(params.n_modes)).map(|k| {
                        g.entries[k - 1].norm_sqr() / (1.0 + bt * (k * k) as f64)
                    }),
                );
            let denom = direct.abs().max(1e-300);
            worst = worst.max((via_projection - direct).abs() / denom);
        }
    }

    let analytic_exponent =
        lambda.powf(2.0 / p) * beta.powf(1.0 - 2.0 / p) * (m as f64).powf(2.0 / p + 1.0);
    Ok(DyadicAuditReport {
        m,
        tail,
        analytic_exponent,
        block_max_discrepancy: worst,
    })
}
