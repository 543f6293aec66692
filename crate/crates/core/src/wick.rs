//! Spectral constants and Wick-ordered functionals.
//!
//! Under the interpolation measure the degree-4 Wick monomial splits along
//! the pairing structure of index quadruples `n1+n2+n3+n4 = 0`:
//!
//! ```text
//! int :u^4:_beta = 12 I1 - 6 I2 + IIa + IIb + IIc
//! ```
//!
//! with `I1, I2` the paired sums, and `II*` the no-pair sum classified by
//! value repetitions: (a) all distinct, (b) exactly one doubled index,
//! (c) a tripled index. `IIb` and `IIc` are summed directly (O(N log N) via
//! convolution and O(N)); `IIa` comes out by subtraction from the no-pair
//! total, which is exact in the algebra and keeps large-N ensembles cheap.
//! A direct enumeration path exists for small N as the oracle.

use crate::error::Result;
use crate::fft;
use crate::kahan::{kahan_sum, Kahan};
use crate::params::MeasureParams;
use crate::rng::GaussianVector;
use num_complex::Complex64;

// ---------------------------------------------------------------------------
// spectral constants a_beta, b_beta, c_beta
// ---------------------------------------------------------------------------

/// `a_beta, b_beta, c_beta`, either truncated to N modes or at N = infinity.
#[derive(Debug, Clone, Copy)]
pub struct SpectralConstants {
    pub beta: f64,
    /// `None` marks the N = infinity values.
    pub n_modes: Option<usize>,
    /// `sum_{n != 0} (1 + bt n^2)^{-1}`
    pub a: f64,
    /// `sum_{n != 0} (1 + bt n^2)^{-2}`
    pub b: f64,
    /// `sum_{n != 0} (1 + bt n^2)^{-4}`
    pub c: f64,
}

/// `J_k(t) = int_0^t ds / (1+s^2)^k` by the standard reduction formula.
fn incomplete_jk(k: u32, t: f64) -> f64 {
    if k == 1 {
        return t.atan();
    }
    let km1 = (k - 1) as f64;
    t / (2.0 * km1 * (1.0 + t * t).powi(k as i32 - 1))
        + (2.0 * km1 - 1.0) / (2.0 * km1) * incomplete_jk(k - 1, t)
}

fn jk_infinity(k: u32) -> f64 {
    // (2k-3)!! / (2k-2)!! * pi/2
    let mut num = 1.0;
    let mut den = 1.0;
    let mut i = 2 * k as i64 - 3;
    while i >= 1 {
        num *= i as f64;
        i -= 2;
    }
    let mut j = 2 * k as i64 - 2;
    while j >= 2 {
        den *= j as f64;
        j -= 2;
    }
    num / den * std::f64::consts::FRAC_PI_2
}

/// `2 sum_{n > n0} (1 + bt n^2)^{-k}` by the midpoint-rule integral
/// `2 int_{n0+1/2}^infty (1 + bt x^2)^{-k} dx`; the midpoint error is
/// O(f''(n0)) and far below every tolerance used here.
fn tail_correction(beta_tilde: f64, k: u32, n0: usize) -> f64 {
    let a = beta_tilde.sqrt();
    let x0 = n0 as f64 + 0.5;
    2.0 / a * (jk_infinity(k) - incomplete_jk(k, a * x0))
}

fn sum_to_infinity(beta_tilde: f64, k: u32) -> f64 {
    // direct terms until they fall below 1e-18 of the running total, then
    // the analytic tail; capped so the pathological beta ~ 1 cases stay fast
    let mut acc = Kahan::new();
    let mut n = 1usize;
    loop {
        let t = 2.0 / (1.0 + beta_tilde * (n * n) as f64).powi(k as i32);
        acc.add(t);
        if (t < 1e-18 * acc.value() && n > 16) || n >= 2_000_000 {
            break;
        }
        n += 1;
    }
    acc.value() + tail_correction(beta_tilde, k, n)
}

fn sum_truncated(beta_tilde: f64, k: u32, n_modes: usize) -> f64 {
    2.0 * kahan_sum((1..=n_modes).map(|n| 1.0 / (1.0 + beta_tilde * (n * n) as f64).powi(k as i32)))
}

/// Closed form `a_beta = pi t coth(pi t) - 1`, `t = beta_tilde^{-1/2}`.
pub fn a_beta_closed_form(beta: f64) -> f64 {
    let bt = 4.0 * std::f64::consts::PI.powi(2) * beta;
    let x = std::f64::consts::PI * bt.powf(-0.5);
    let coth = 1.0 + 2.0 / (2.0 * x).exp_m1();
    x * coth - 1.0
}

/// `a_beta` by compensated summation plus the analytic tail; the
/// independent cross-check of the closed form.
pub fn a_beta_by_summation(beta: f64) -> f64 {
    let bt = 4.0 * std::f64::consts::PI.powi(2) * beta;
    sum_to_infinity(bt, 1)
}

impl SpectralConstants {
    /// Truncated sums when `n_modes` is given, N = infinity values otherwise
    /// (`a` by the coth closed form, `b`, `c` by summation with analytic
    /// tail).
    pub fn compute(beta: f64, n_modes: Option<usize>) -> Self {
        assert!(beta > 0.0, "constants need beta > 0");
        let bt = 4.0 * std::f64::consts::PI.powi(2) * beta;
        match n_modes {
            Some(n) => Self {
                beta,
                n_modes,
                a: sum_truncated(bt, 1, n),
                b: sum_truncated(bt, 2, n),
                c: sum_truncated(bt, 4, n),
            },
            None => Self {
                beta,
                n_modes,
                a: a_beta_closed_form(beta),
                b: sum_to_infinity(bt, 2),
                c: sum_to_infinity(bt, 4),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// per-sample Wick report
// ---------------------------------------------------------------------------

/// All degree <= 4 functionals of one sample.
#[derive(Debug, Clone, Copy)]
pub struct WickReport {
    pub int_u2: f64,
    pub wick_u2: f64,
    pub int_u4: f64,
    pub wick_u4: f64,
    pub i1: f64,
    pub i2: f64,
    pub ii_a: f64,
    pub ii_b: f64,
    pub ii_c: f64,
    /// `beta * IIa` restricted to `|n_j| <= M`; present when an M was given.
    pub f_beta_m: Option<f64>,
}

impl WickReport {
    /// `wick_u4 - (12 I1 - 6 I2 + IIa + IIb + IIc)`. The left side goes
    /// through grid quadrature, the right through coefficient convolutions,
    /// so this residual measures genuine numerical agreement of the two
    /// routes, not an algebraic tautology.
    pub fn decomposition_residual(&self) -> f64 {
        self.wick_u4 - (12.0 * self.i1 - 6.0 * self.i2 + self.ii_a + self.ii_b + self.ii_c)
    }

    pub fn csv_header() -> &'static str {
        "int_u2,wick_u2,int_u4,wick_u4,i1,i2,ii_a,ii_b,ii_c,f_beta_m"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            self.int_u2,
            self.wick_u2,
            self.int_u4,
            self.wick_u4,
            self.i1,
            self.i2,
            self.ii_a,
            self.ii_b,
            self.ii_c,
            self.f_beta_m.map_or(String::new(), |f| format!("{f:.17e}")),
        )
    }
}

/// Reusable per-(beta, N) state for Wick reports.
pub struct WickContext {
    params: MeasureParams,
    /// `w_n = (1 + bt n^2)^{-1/2}`, n = 1..N
    weights: Vec<f64>,
    /// truncated `a_beta`
    pub a_beta: f64,
}

impl WickContext {
    pub fn new(params: MeasureParams) -> Self {
        let bt = params.beta_tilde();
        let weights: Vec<f64> = (1..=params.n_modes)
            .map(|n| 1.0 / (1.0 + bt * (n * n) as f64).sqrt())
            .collect();
        let a_beta = sum_truncated(bt, 1, params.n_modes);
        Self {
            params,
            weights,
            a_beta,
        }
    }

    pub fn params(&self) -> &MeasureParams {
        &self.params
    }

    /// Full report for one Gaussian draw; `m` requests `F_{beta,M}` too.
    pub fn report(&self, g: &GaussianVector, m: Option<usize>) -> Result<WickReport> {
        let n = self.params.n_modes;
        if g.len() != n {
            return Err(crate::error::LabError::DimensionMismatch {
                left: g.len(),
                right: n,
                context: "gaussian vector vs n_modes",
            });
        }
        if let Some(m) = m {
            if m > n {
                return Err(crate::error::LabError::DimensionMismatch {
                    left: m,
                    right: n,
                    context: "F_{beta,M} cutoff vs n_modes",
                });
            }
        }

        // u_hat(n) = g_n w_n for n >= 1
        let coeffs: Vec<Complex64> = g
            .entries
            .iter()
            .zip(&self.weights)
            .map(|(gn, &w)| gn * w)
            .collect();

        let int_u2 = 2.0 * kahan_sum(coeffs.iter().map(|c| c.norm_sqr()));
        let a = self.a_beta;
        let wick_u2 = int_u2 - a;

        // quadrature route for int u^4
        let grid_size = fft::fast_grid_size(4 * n + 1);
        let grid = fft::synthesize_values(&coeffs, grid_size);
        let int_u4 = kahan_sum(grid.iter().map(|z| z.re.powi(4))) / grid_size as f64;
        let wick_u4 = int_u4 - 6.0 * a * int_u2 + 3.0 * a * a;

        let i1 = {
            let s = kahan_sum(
                g.entries
                    .iter()
                    .zip(&self.weights)
                    .map(|(gn, &w)| (gn.norm_sqr() - 1.0) * w * w),
            );
            s * s
        };
        let i2 = kahan_sum(
            g.entries
                .iter()
                .zip(&self.weights)
                .map(|(gn, &w)| gn.norm_sqr().powi(2) * w.powi(4)),
        );

        let (ii_a, ii_b, ii_c) = no_pair_parts(&coeffs, int_u2, i2);
        let f_beta_m = m.map(|m| {
            if m == n {
                self.params.beta * ii_a
            } else {
                let sub = &coeffs[..m];
                let int_u2_m = 2.0 * kahan_sum(sub.iter().map(|c| c.norm_sqr()));
                let i2_m = kahan_sum(
                    g.entries[..m]
                        .iter()
                        .zip(&self.weights[..m])
                        .map(|(gn, &w)| gn.norm_sqr().powi(2) * w.powi(4)),
                );
                let (a_m, _, _) = no_pair_parts(sub, int_u2_m, i2_m);
                self.params.beta * a_m
            }
        });

        Ok(WickReport {
            int_u2,
            wick_u2,
            int_u4,
            wick_u4,
            i1,
            i2,
            ii_a,
            ii_b,
            ii_c,
            f_beta_m,
        })
    }
}

/// Split the no-pair sum `II` of a coefficient vector into (a), (b), (c).
///
/// The spectral route: `int u^4` as `sum_m |(u*u)(m)|^2` via one linear
/// convolution, the paired part removed in closed form, `IIb` by a second
/// use of the same convolution, `IIc` by an O(N) sum, and `IIa` by
/// subtraction.
fn no_pair_parts(coeffs: &[Complex64], int_u2: f64, i2: f64) -> (f64, f64, f64) {
    let n = coeffs.len();
    // signed layout s[k + n] = u_hat(k), k in [-n, n]
    let mut s = vec![Complex64::ZERO; 2 * n + 1];
    for (i, &c) in coeffs.iter().enumerate() {
        s[n + i + 1] = c;
        s[n - i - 1] = c.conj();
    }
    let conv = fft::signed_convolution(&s, &s); // covers [-2n, 2n], slot m + 2n
    let at = |m: i64| -> Complex64 {
        let idx = m + 2 * n as i64;
        if idx < 0 || idx as usize >= conv.len() {
            Complex64::ZERO
        } else {
            conv[idx as usize]
        }
    };
    let coeff = |k: i64| -> Complex64 {
        let a = k.unsigned_abs() as usize;
        if k == 0 || a > n {
            Complex64::ZERO
        } else if k > 0 {
            coeffs[a - 1]
        } else {
            coeffs[a - 1].conj()
        }
    };

    // int u^4 through the convolution: conv(0)^2 + 2 sum_{m>=1} |conv(m)|^2
    let int_u4_spec = at(0).re.powi(2)
        + 2.0 * kahan_sum((1..=2 * n as i64).map(|m| at(m).norm_sqr()));
    // paired part: 3 (int u^2)^2 - 3 sum_{n != 0} |u_hat|^4 = 3 (int u^2)^2 - 6 I2
    let ii_total = int_u4_spec - 3.0 * int_u2 * int_u2 + 6.0 * i2;

    // (c): three equal indices, tuples (k,k,k,-3k), 4 ordered arrangements
    let mut ii_c_acc = Kahan::new();
    let mut k = 1i64;
    while 3 * k <= n as i64 {
        let c = coeffs[(k - 1) as usize];
        ii_c_acc.add((c * c * c * coeffs[(3 * k - 1) as usize].conj()).re);
        k += 1;
    }
    let ii_c = 8.0 * ii_c_acc.value();

    // (b): one doubled index m, tuples (m,m,k,-2m-k), 12 ordered arrangements;
    // inner sum over k is conv(-2m) minus the excluded k in {m, -m, -3m}, and
    // it visits each unordered {k,l} twice, leaving a net factor 6
    let mut ii_b_acc = Kahan::new();
    for mm in 1..=n as i64 {
        for m in [mm, -mm] {
            let cm = coeff(m);
            let inner = at(-2 * m)
                - 2.0 * cm * coeff(-3 * m)
                - coeff(-m) * coeff(-m);
            ii_b_acc.add((cm * cm * inner).re);
        }
    }
    let ii_b = 6.0 * ii_b_acc.value();

    let ii_a = ii_total - ii_b - ii_c;
    (ii_a, ii_b, ii_c)
}

/// Direct enumeration of `IIa` over ordered quadruples, O(M^3); the oracle
/// behind the subtraction path, only sensible for small M.
pub fn ii_a_direct(g: &GaussianVector, params: &MeasureParams, m: usize) -> f64 {
    assert!(m <= 64, "direct IIa enumeration is the small-N oracle");
    let bt = params.beta_tilde();
    let mi = m as i64;
    let w = |k: i64| 1.0 / (1.0 + bt * (k * k) as f64).sqrt();
    let mut acc = Kahan::new();
    for n1 in -mi..=mi {
        if n1 == 0 {
            continue;
        }
        for n2 in -mi..=mi {
            if n2 == 0 {
                continue;
            }
            for n3 in -mi..=mi {
                if n3 == 0 {
                    continue;
                }
                let n4 = -(n1 + n2 + n3);
                if n4 == 0 || n4.abs() > mi {
                    continue;
                }
                let q = [n1, n2, n3, n4];
                // no pair, all values distinct <=> all |n_j| distinct
                let mut abs: Vec<i64> = q.iter().map(|x| x.abs()).collect();
                abs.sort_unstable();
                if abs.windows(2).any(|p| p[0] == p[1]) {
                    continue;
                }
                let term: Complex64 = q.iter().map(|&k| g.entry(k) * w(k)).product();
                acc.add(term.re);
            }
        }
    }
    acc.value()
}

/// Exact `E[(IIa restricted to |n_j| <= M)^2]` under the interpolation
/// measure, by Moebius inversion over the |n|-equality partition lattice.
/// With `h(n) = (1 + bt n^2)^{-1}`:
///
/// ```text
/// E[IIa^2] = 24 (S_all - 6 A - 3 H2^2 + 9 H4 + 8 H31)
/// ```
///
/// where `S_all` sums `prod h` over all zero-sum quadruples, `A` is the
/// doubled-index sum, and `H2, H4, H31` are the one-dimensional sums below.
pub fn ii_a_second_moment_exact(beta: f64, m: usize) -> f64 {
    let bt = 4.0 * std::f64::consts::PI.powi(2) * beta;
    let h: Vec<f64> = (1..=m).map(|n| 1.0 / (1.0 + bt * (n * n) as f64)).collect();
    // signed layout for the convolution
    let mut hs = vec![Complex64::ZERO; 2 * m + 1];
    for (i, &v) in h.iter().enumerate() {
        hs[m + i + 1] = Complex64::new(v, 0.0);
        hs[m - i - 1] = Complex64::new(v, 0.0);
    }
    let conv = fft::signed_convolution(&hs, &hs); // (h*h)(k), slot k + 2m
    let c_at = |k: i64| conv[(k + 2 * m as i64) as usize].re;

    let s_all = kahan_sum((-2 * m as i64..=2 * m as i64).map(|k| c_at(k) * c_at(k)));
    let a_sum = 2.0 * kahan_sum((1..=m as i64).map(|n| {
        let hn = h[(n - 1) as usize];
        hn * hn * c_at(2 * n)
    }));
    let h2 = 2.0 * kahan_sum(h.iter().map(|v| v * v));
    let h4 = 2.0 * kahan_sum(h.iter().map(|v| v.powi(4)));
    let h31 = 2.0 * kahan_sum(
        (1..=m / 3).map(|n| h[n - 1].powi(3) * h[3 * n - 1]),
    );

    24.0 * (s_all - 6.0 * a_sum - 3.0 * h2 * h2 + 9.0 * h4 + 8.0 * h31)
}

// ---------------------------------------------------------------------------
// ensemble moment checks
// ---------------------------------------------------------------------------

/// Lemma-level moment summary of a Wick-report ensemble.
#[derive(Debug, Clone, Copy)]
pub struct MomentChecks {
    pub n: usize,
    pub mean_wick_u2: f64,
    pub se_mean_wick_u2: f64,
    pub var_wick_u2: f64,
    pub se_var_wick_u2: f64,
    /// reference value `2 b_beta(N)`
    pub two_b_beta: f64,
    pub mean_wick_u4: f64,
    pub se_mean_wick_u4: f64,
    /// `E[(wick_u4)^2] * beta^{3/2}`
    pub m2_wick_u4_scaled: f64,
    pub se_m2_wick_u4_scaled: f64,
}

pub fn moment_checks(reports: &[WickReport], params: &MeasureParams) -> MomentChecks {
    let n = reports.len();
    let nf = n as f64;
    let bt = params.beta_tilde();
    let two_b = 2.0 * sum_truncated(bt, 2, params.n_modes);

    let mean2 = kahan_sum(reports.iter().map(|r| r.wick_u2)) / nf;
    let var2 = kahan_sum(reports.iter().map(|r| (r.wick_u2 - mean2).powi(2))) / (nf - 1.0);
    let se_mean2 = (var2 / nf).sqrt();
    // stderr of the sample variance from the fourth central moment
    let m4_2 = kahan_sum(reports.iter().map(|r| (r.wick_u2 - mean2).powi(4))) / nf;
    let se_var2 = ((m4_2 - var2 * var2).max(0.0) / nf).sqrt();

    let mean4 = kahan_sum(reports.iter().map(|r| r.wick_u4)) / nf;
    let var4 = kahan_sum(reports.iter().map(|r| (r.wick_u4 - mean4).powi(2))) / (nf - 1.0);
    let se_mean4 = (var4 / nf).sqrt();

    let scale = params.beta.powf(1.5);
    let m2 = kahan_sum(reports.iter().map(|r| r.wick_u4 * r.wick_u4)) / nf;
    let var_m2 =
        kahan_sum(reports.iter().map(|r| (r.wick_u4 * r.wick_u4 - m2).powi(2))) / (nf - 1.0);

    MomentChecks {
        n,
        mean_wick_u2: mean2,
        se_mean_wick_u2: se_mean2,
        var_wick_u2: var2,
        se_var_wick_u2: se_var2,
        two_b_beta: two_b,
        mean_wick_u4: mean4,
        se_mean_wick_u4: se_mean4,
        m2_wick_u4_scaled: m2 * scale,
        se_m2_wick_u4_scaled: (var_m2 / nf).sqrt() * scale,
    }
}
