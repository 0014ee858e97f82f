use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Masses below this are treated as exactly zero (base +inf), so that
/// `f^alpha` never overflows for negative alpha.
pub const MASS_FLOOR: f64 = 1e-300;

/// The concavity parameter `alpha` in (-inf, 0], stored with
/// `beta = -1/alpha` (+inf for the log-concave case alpha = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaParam {
    alpha: f64,
    beta: f64,
}

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and <= 0, got {alpha}"
            )));
        }
        let beta = if alpha == 0.0 {
            f64::INFINITY
        } else {
            -1.0 / alpha
        };
        Ok(Self { alpha, beta })
    }

    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be > 0, got {beta}"
            )));
        }
        let alpha = if beta.is_infinite() { 0.0 } else { -1.0 / beta };
        Ok(Self { alpha, beta })
    }

    pub fn log_concave() -> Self {
        Self {
            alpha: 0.0,
            beta: f64::INFINITY,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_log_concave(&self) -> bool {
        self.beta.is_infinite()
    }

    /// `kappa(n) = alpha / (1 + n alpha) = 1 / (n - beta)`; defined for
    /// `alpha >= -1/n`. At `alpha = -1/n` it is `-inf`.
    pub fn kappa(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        if self.beta.is_infinite() {
            return Ok(0.0);
        }
        if self.beta < nf {
            return Err(Error::KappaUndefined {
                alpha: self.alpha,
                n,
            });
        }
        if self.beta == nf {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(1.0 / (nf - self.beta))
    }

    /// `(1 - f^alpha) / alpha`, or `-log f` at alpha = 0; zero mass maps to +inf.
    #[inline]
    pub fn base_value(&self, f: f64) -> f64 {
        if f < MASS_FLOOR {
            return f64::INFINITY;
        }
        if self.is_log_concave() {
            -f.ln()
        } else {
            // beta (f^(-1/beta) - 1), written to stay accurate for large beta
            self.beta * (-f.ln() / self.beta).exp_m1()
        }
    }

    /// `(1 + phi/beta)^(-beta)`, or `exp(-phi)` at alpha = 0; +inf maps to 0.
    /// The caller guarantees `phi > -beta`.
    #[inline]
    pub fn mass_value(&self, phi: f64) -> f64 {
        if phi == f64::INFINITY {
            return 0.0;
        }
        if self.is_log_concave() {
            (-phi).exp()
        } else {
            (-self.beta * (phi / self.beta).ln_1p()).exp()
        }
    }

    /// `f^alpha` with the conventions `0^alpha = +inf` (alpha < 0).
    #[inline]
    pub(crate) fn power(&self, f: f64) -> f64 {
        if f < MASS_FLOOR {
            f64::INFINITY
        } else {
            f.powf(self.alpha)
        }
    }
}

impl std::fmt::Display for AlphaParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "alpha={} (beta={})", self.alpha, self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_and_alpha_are_reciprocal() {
        let p = AlphaParam::new(-0.5).unwrap();
        assert_eq!(p.beta(), 2.0);
        let q = AlphaParam::from_beta(2.0).unwrap();
        assert_eq!(q.alpha(), -0.5);
        assert!(AlphaParam::new(0.0).unwrap().beta().is_infinite());
        assert!(AlphaParam::new(0.5).is_err());
        assert!(AlphaParam::from_beta(0.0).is_err());
    }

    #[test]
    fn kappa_values() {
        let p = AlphaParam::from_beta(2.0).unwrap();
        assert_eq!(p.kappa(1).unwrap(), -1.0);
        assert_eq!(p.kappa(2).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(
            p.kappa(3),
            Err(Error::KappaUndefined { n: 3, .. })
        ));
        assert_eq!(AlphaParam::log_concave().kappa(2).unwrap(), 0.0);
        // alpha / (1 + n alpha) agrees with 1 / (n - beta)
        let a = AlphaParam::new(-0.2).unwrap();
        assert!((a.kappa(2).unwrap() - (-0.2 / (1.0 - 0.4))).abs() < 1e-15);
    }

    #[test]
    fn pointwise_base_and_mass() {
        let p = AlphaParam::from_beta(2.0).unwrap();
        // f(2) = (1 + 4/4)^(-2) = 1/4 has base 2
        assert!((p.base_value(0.25) - 2.0).abs() < 1e-15);
        assert!((p.mass_value(2.0) - 0.25).abs() < 1e-15);
        let one = AlphaParam::from_beta(1.0).unwrap();
        assert!((one.mass_value(-0.75) - 4.0).abs() < 1e-14);
        assert_eq!(p.base_value(0.0), f64::INFINITY);
        assert_eq!(p.mass_value(f64::INFINITY), 0.0);
        let lc = AlphaParam::log_concave();
        assert!((lc.base_value((-0.5f64).exp()) - 0.5).abs() < 1e-15);
    }
}
