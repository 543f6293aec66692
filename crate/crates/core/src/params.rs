//! Parameters identifying one measure of the interpolation family.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};

/// Sign of the Gibbs weight `exp(sign * beta * int u^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Focusing => 1.0,
            Sign::Defocusing => -1.0,
        }
    }
}

/// `(beta, K, p, sign, N)` plus the derived `beta_tilde = 4 pi^2 beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    /// Inverse-variance parameter; 0 is allowed only for white noise.
    pub beta: f64,
    /// L^2 cutoff constant: the indicator is `int u^2 <= K beta^{-1/2}`.
    pub cutoff_k: f64,
    /// Power of the nonlinearity, 3 or 4.
    pub power_p: u32,
    pub sign: Sign,
    /// Spectral truncation, shared by every measure of one experiment.
    pub n_modes: usize,
}

impl MeasureParams {
    pub fn new(beta: f64, cutoff_k: f64, power_p: u32, sign: Sign, n_modes: usize) -> Self {
        Self {
            beta,
            cutoff_k,
            power_p,
            sign,
            n_modes,
        }
    }

    pub fn beta_tilde(&self) -> f64 {
        4.0 * std::f64::consts::PI.powi(2) * self.beta
    }

    /// The defocusing quartic weight is bounded, so that measure carries no
    /// L^2 cutoff; every other member needs one.
    pub fn has_cutoff(&self) -> bool {
        !(self.power_p == 4 && self.sign == Sign::Defocusing)
    }

    /// Cutoff threshold `K beta^{-1/2}`.
    pub fn cutoff_threshold(&self) -> f64 {
        self.cutoff_k * self.beta.powf(-0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(LabError::Validation {
                field: "beta",
                constraint: "beta > 0 (beta = 0 only via the white-noise sampler)".into(),
            });
        }
        if self.power_p != 3 && self.power_p != 4 {
            return Err(LabError::Validation {
                field: "power_p",
                constraint: "p in {3, 4}".into(),
            });
        }
        if self.has_cutoff() && self.cutoff_k <= 0.5 {
            return Err(LabError::Validation {
                field: "cutoff_k",
                constraint: "Let K > 1/2".into(),
            });
        }
        if self.n_modes == 0 {
            return Err(LabError::Validation {
                field: "n_modes",
                constraint: "N >= 1".into(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_tilde_is_exact() {
        let p = MeasureParams::new(0.25, 1.0, 4, Sign::Focusing, 8);
        assert_eq!(p.beta_tilde(), std::f64::consts::PI.powi(2));
    }

    #[test]
    fn small_k_rejected() {
        let p = MeasureParams::new(1e-2, 0.4, 4, Sign::Focusing, 8);
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("K > 1/2"), "{err}");
        // no cutoff in the defocusing quartic case, so K is unconstrained
        let q = MeasureParams::new(1e-2, 0.4, 4, Sign::Defocusing, 8);
        assert!(q.validate().is_ok());
    }
}
