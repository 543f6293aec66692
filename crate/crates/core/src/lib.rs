//! Spectral Monte Carlo laboratory for mean-zero Gaussian measures on the
//! circle `T = R/Z`.
//!
//! The crate builds the one-parameter family of Gaussian measures whose
//! Fourier coefficients are `g_n / sqrt(1 + beta_tilde n^2)` (interpolating
//! between a Brownian loop at large `beta` and white noise at `beta = 0`),
//! reweights them into Gibbs-type measures by `exp(sigma beta \int u^p)`
//! with an `L^2` cutoff, and measures the functionals that control the
//! small-`beta` behaviour: Wick-ordered monomials and their pairing
//! decomposition, characteristic functionals, exponential moments, tail
//! probabilities, and KdV flow invariance.
//!
//! Entry points:
//! - [`field`]: truncated real trigonometric polynomials as Hermitian
//!   Fourier coefficients, exact norms and quadrature.
//! - [`rng`] / [`sampler`]: reproducible counter-style Gaussian streams and
//!   samplers for every measure in the family.
//! - [`wick`]: spectral constants `a_beta`, `b_beta`, `c_beta` and the
//!   degree-4 Wick decomposition `12 I1 - 6 I2 + IIa + IIb + IIc`.
//! - [`measure`]: self-normalized importance-sampling estimators, closed
//!   form normalizers, chi-square and dyadic tail checks.
//! - [`kdv`]: integrating-factor RK4 pseudospectral KdV and the measure
//!   invariance experiment.
//! - [`harness`]: named experiments with CSV/JSON emission, used by the
//!   `specmc` binary and the examples.

pub mod error;
pub mod estimate;
pub mod fft;
pub mod field;
pub mod harness;
pub mod kahan;
pub mod kdv;
pub mod measure;
pub mod params;
pub mod rng;
pub mod sampler;
pub mod wick;

pub use error::LabError;
pub use estimate::{ComplexEstimate, Estimate};
pub use field::{DyadicSpec, GridField, Projection, SobolevIndex, SpectralField};
pub use params::{MeasureParams, Sign};
pub use rng::{GaussianStream, GaussianVector};
pub use wick::{SpectralConstants, WickReport};
