//! Mean-zero real trigonometric polynomials on the circle, stored as the
//! positive half of their Fourier coefficients.
//!
//! A field is `u(x) = sum_{0<|n|<=N} u_hat(n) e^{2 pi i n x}` with
//! `u_hat(-n) = conj(u_hat(n))`. Only `c_n = u_hat(n)` for `n >= 1` is
//! stored; reality is structural and the `n = 0` mode does not exist, so
//! every field integrates to zero.

use crate::error::{LabError, Result};
use crate::fft;
use crate::kahan::kahan_sum;
use num_complex::Complex64;
use std::io::{BufRead, Write};

/// Truncated mean-zero real field in spectral form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
    /// The beta this field was sampled under (0 for white noise). Metadata
    /// only; no operation branches on it.
    pub beta_tag: f64,
}

/// Point values `u(j/G)`, `j = 0..G-1`.
#[derive(Debug, Clone)]
pub struct GridField {
    pub values: Vec<f64>,
}

/// Sobolev regularity index; negative values are the interesting ones here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex(pub f64);

/// Dyadic frequency block `(M_{j-1}, M_j]` with `M_j = 2^j * base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicSpec {
    pub base: usize,
    pub level: u32,
}

impl DyadicSpec {
    pub fn upper(&self) -> usize {
        self.base << self.level
    }
    pub fn lower(&self) -> usize {
        debug_assert!(self.level >= 1);
        self.base << (self.level - 1)
    }
}

/// Frequency index sets for Dirichlet projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Above(usize),
    AtOrBelow(usize),
    Dyadic(DyadicSpec),
}

impl Projection {
    fn keeps(&self, n: usize) -> bool {
        match *self {
            Projection::Above(m) => n > m,
            Projection::AtOrBelow(m) => n <= m,
            Projection::Dyadic(d) => n > d.lower() && n <= d.upper(),
        }
    }
}

// relative tolerance for the synthesized imaginary residue
const IM_RESIDUE_REL: f64 = 1e-10;

impl SpectralField {
    pub fn new(coeffs: Vec<Complex64>, beta_tag: f64) -> Self {
        Self { coeffs, beta_tag }
    }

    pub fn zero(n_modes: usize) -> Self {
        Self::new(vec![Complex64::ZERO; n_modes], 0.0)
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// `c_n` for `n >= 1` (index 0 holds `c_1`).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient `u_hat(n)` for any nonzero signed index, zero outside the
    /// truncation.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let a = n.unsigned_abs() as usize;
        if n == 0 || a > self.coeffs.len() {
            Complex64::ZERO
        } else if n > 0 {
            self.coeffs[a - 1]
        } else {
            self.coeffs[a - 1].conj()
        }
    }

    /// Evaluate on a uniform grid. Rejects grids that alias the band-limit.
    pub fn synthesize(&self, grid_size: usize) -> Result<GridField> {
        let required = 2 * self.n_modes() + 1;
        if grid_size < required {
            return Err(LabError::GridTooSmall {
                grid_size,
                n_modes: self.n_modes(),
                required,
            });
        }
        let buf = fft::synthesize_values(&self.coeffs, grid_size);
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut values = Vec::with_capacity(grid_size);
        for z in buf {
            debug_assert!(
                z.im.abs() <= IM_RESIDUE_REL * scale * grid_size as f64,
                "imaginary residue {} exceeds tolerance",
                z.im
            );
            values.push(z.re);
        }
        Ok(GridField { values })
    }

    /// Recover a field from grid values (inverse of `synthesize` when
    /// `values.len() >= 2 n_modes + 1`).
    pub fn analyze(values: &GridField, n_modes: usize, beta_tag: f64) -> Self {
        Self::new(fft::analyze_values(&values.values, n_modes), beta_tag)
    }

    /// `int_T u^2 = 2 sum_{n>=1} |c_n|^2` (Parseval).
    pub fn l2_norm_sq(&self) -> f64 {
        2.0 * kahan_sum(self.coeffs.iter().map(|c| c.norm_sqr()))
    }

    /// `int_T u^p` for `p in {3, 4}`, by quadrature on the smallest 5-smooth
    /// grid with `G >= p N + 1` (exact for degree-p trigonometric
    /// polynomials).
    pub fn lp_integral(&self, p: u32) -> f64 {
        assert!(p == 3 || p == 4, "lp_integral is defined for p in {{3,4}}");
        let g = fft::fast_grid_size(p as usize * self.n_modes() + 1);
        let grid = fft::synthesize_values(&self.coeffs, g);
        let s = kahan_sum(grid.iter().map(|z| z.re.powi(p as i32)));
        s / g as f64
    }

    /// `sum_{n != 0} |n|^{2s} |u_hat(n)|^2`.
    pub fn sobolev_norm_sq(&self, s: SobolevIndex) -> f64 {
        2.0 * kahan_sum(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| ((i + 1) as f64).powf(2.0 * s.0) * c.norm_sqr()),
        )
    }

    /// Dirichlet projection: zero every coefficient outside the index set.
    pub fn project(&self, kind: Projection) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if kind.keeps(i + 1) { c } else { Complex64::ZERO })
            .collect();
        Self::new(coeffs, self.beta_tag)
    }

    /// Dyadic blocks `(M_{j-1}, M_j]`, `j = 1..`, tiling `(M, N]`.
    pub fn dyadic_blocks(n_modes: usize, base: usize) -> Vec<DyadicSpec> {
        let mut blocks = Vec::new();
        let mut level = 1;
        while (base << (level - 1)) < n_modes {
            blocks.push(DyadicSpec { base, level });
            level += 1;
        }
        blocks
    }

    /// Pairing `<f, u> = sum_{n != 0} f_hat(n) u_hat(-n)`, real for real
    /// fields.
    pub fn pair(&self, f: &SpectralField) -> f64 {
        let m = self.n_modes().min(f.n_modes());
        2.0 * kahan_sum((0..m).map(|i| (f.coeffs[i] * self.coeffs[i].conj()).re))
    }

    /// Columnar text record: `N`, then one `n re im` line per mode.
    pub fn write_record<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", self.n_modes())?;
        for (i, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{} {:.17e} {:.17e}", i + 1, c.re, c.im)?;
        }
        Ok(())
    }

    pub fn read_record<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let n: usize = line
            .trim()
            .parse()
            .map_err(|_| LabError::Precondition(format!("bad record header: {line:?}")))?;
        let mut coeffs = vec![Complex64::ZERO; n];
        for _ in 0..n {
            line.clear();
            r.read_line(&mut line)?;
            let mut it = line.split_whitespace();
            let idx: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| {
                LabError::Precondition(format!("bad record line: {line:?}"))
            })?;
            let re: f64 = it.next().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
            let im: f64 = it.next().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
            if idx == 0 || idx > n || !re.is_finite() || !im.is_finite() {
                return Err(LabError::Precondition(format!("bad record line: {line:?}")));
            }
            coeffs[idx - 1] = Complex64::new(re, im);
        }
        Ok(Self::new(coeffs, 0.0))
    }
}

impl std::ops::Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.n_modes(), rhs.n_modes());
        SpectralField::new(
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            self.beta_tag,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_mode(n_modes: usize, n: usize, c: Complex64) -> SpectralField {
        let mut coeffs = vec![Complex64::ZERO; n_modes];
        coeffs[n - 1] = c;
        SpectralField::new(coeffs, 0.0)
    }

    #[test]
    fn synthesize_single_cosine() {
        // c_1 = 1 -> u(x) = 2 cos(2 pi x)
        let f = single_mode(1, 1, Complex64::new(1.0, 0.0));
        let g = f.synthesize(8).unwrap();
        assert_relative_eq!(g.values[0], 2.0, max_relative = 1e-14);
        for (j, &v) in g.values.iter().enumerate() {
            let x = j as f64 / 8.0;
            assert_relative_eq!(v, 2.0 * (2.0 * std::f64::consts::PI * x).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn synthesize_single_sine() {
        // c_1 = i -> u(x) = -2 sin(2 pi x); u(1/4) = -2
        let f = single_mode(1, 1, Complex64::new(0.0, 1.0));
        let g = f.synthesize(8).unwrap();
        assert_relative_eq!(g.values[2], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn synthesize_zero_field() {
        let f = SpectralField::zero(4);
        let g = f.synthesize(16).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn synthesize_rejects_small_grid() {
        let f = SpectralField::zero(4);
        assert!(matches!(
            f.synthesize(8),
            Err(LabError::GridTooSmall { required: 9, .. })
        ));
    }

    #[test]
    fn grid_mean_is_zero() {
        let f = random_field(16, 7);
        let g = f.synthesize(64).unwrap();
        let mean: f64 = g.values.iter().sum::<f64>() / 64.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn l2_single_mode() {
        let f = single_mode(3, 1, Complex64::new(1.0, 0.0));
        assert_relative_eq!(f.l2_norm_sq(), 2.0);
        assert_eq!(SpectralField::zero(3).l2_norm_sq(), 0.0);
    }

    fn random_field(n: usize, seed: u64) -> SpectralField {
        // cheap deterministic pseudo-random coefficients for unit tests
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        SpectralField::new(
            (0..n).map(|_| Complex64::new(next(), next())).collect(),
            0.0,
        )
    }

    #[test]
    fn parseval_vs_quadrature() {
        let f = random_field(64, 3);
        let g = f.synthesize(257).unwrap();
        let quad: f64 = g.values.iter().map(|v| v * v).sum::<f64>() / 257.0;
        assert_relative_eq!(f.l2_norm_sq(), quad, max_relative = 1e-10);
    }

    #[test]
    fn round_trip_analyze() {
        let f = random_field(32, 11);
        let g = f.synthesize(2 * 32 + 1).unwrap();
        let back = SpectralField::analyze(&g, 32, 0.0);
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn lp_integral_cosine() {
        // u = 2 cos(2 pi x): int u^4 = 16 * 3/8 = 6, int u^3 = 0
        let f = single_mode(1, 1, Complex64::new(1.0, 0.0));
        assert_relative_eq!(f.lp_integral(4), 6.0, max_relative = 1e-13);
        assert!(f.lp_integral(3).abs() < 1e-13);
    }

    /// Brute-force index sum for int u^p over all signed index tuples
    /// summing to zero.
    fn lp_bruteforce(f: &SpectralField, p: usize) -> f64 {
        let n = f.n_modes() as i64;
        let idx: Vec<i64> = (-n..=n).filter(|&k| k != 0).collect();
        let mut total = Complex64::ZERO;
        match p {
            3 => {
                for &a in &idx {
                    for &b in &idx {
                        let c = -(a + b);
                        if c != 0 && c.abs() <= n {
                            total += f.coeff(a) * f.coeff(b) * f.coeff(c);
                        }
                    }
                }
            }
            4 => {
                for &a in &idx {
                    for &b in &idx {
                        for &c in &idx {
                            let d = -(a + b + c);
                            if d != 0 && d.abs() <= n {
                                total += f.coeff(a) * f.coeff(b) * f.coeff(c) * f.coeff(d);
                            }
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        assert!(total.im.abs() < 1e-10);
        total.re
    }

    #[test]
    fn lp_integral_matches_index_sum() {
        for n in [2usize, 5, 8, 16] {
            let f = random_field(n, n as u64);
            for p in [3usize, 4] {
                let quad = f.lp_integral(p as u32);
                let brute = lp_bruteforce(&f, p);
                assert_relative_eq!(quad, brute, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sobolev_norms() {
        let f = random_field(8, 2);
        assert_relative_eq!(f.sobolev_norm_sq(SobolevIndex(0.0)), f.l2_norm_sq());
        let f1 = single_mode(2, 1, Complex64::new(1.0, 0.0));
        assert_relative_eq!(f1.sobolev_norm_sq(SobolevIndex(-1.0)), 2.0);
        let f2 = single_mode(2, 2, Complex64::new(1.0, 0.0));
        assert_relative_eq!(f2.sobolev_norm_sq(SobolevIndex(-0.5)), 1.0);
    }

    #[test]
    fn projections_partition() {
        let f = random_field(16, 5);
        // P_{>N} kills everything
        assert_eq!(f.project(Projection::Above(16)).l2_norm_sq(), 0.0);
        // P_{<=M} + sum_j P_{M_j} = identity
        let m = 2;
        let mut acc = f.project(Projection::AtOrBelow(m));
        for block in SpectralField::dyadic_blocks(16, m) {
            acc = &acc + &f.project(Projection::Dyadic(block));
        }
        for (a, b) in acc.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn dyadic_block_indices() {
        // N=16, M=2, j=2 keeps |n| in (4, 8]
        let f = random_field(16, 9);
        let block = f.project(Projection::Dyadic(DyadicSpec { base: 2, level: 2 }));
        for (i, c) in block.coeffs().iter().enumerate() {
            let n = i + 1;
            if (5..=8).contains(&n) {
                assert_eq!(*c, f.coeffs()[i]);
            } else {
                assert_eq!(*c, Complex64::ZERO);
            }
        }
    }

    #[test]
    fn projection_algebra() {
        let f = random_field(16, 13);
        let m = 5;
        // complementary projections compose to zero and are idempotent
        let low_high = f
            .project(Projection::AtOrBelow(m))
            .project(Projection::Above(m));
        assert_eq!(low_high.l2_norm_sq(), 0.0);
        let low = f.project(Projection::AtOrBelow(m));
        assert_eq!(low.project(Projection::AtOrBelow(m)), low);
        // self-adjoint wrt the coefficient pairing: <Pu, v> = <u, Pv>
        let g = random_field(16, 17);
        let lhs = f.project(Projection::AtOrBelow(m)).pair(&g);
        let rhs = g.project(Projection::AtOrBelow(m)).pair(&f);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn record_round_trip() {
        let f = random_field(6, 21);
        let mut buf = Vec::new();
        f.write_record(&mut buf).unwrap();
        let back = SpectralField::read_record(&mut buf.as_slice()).unwrap();
        assert_eq!(f.coeffs(), back.coeffs());
    }
}
