use crate::error::{Error, Result};

/// `B_2k / (2k (2k - 1))` for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// `ln Gamma(x)` for `x > 0`.
///
/// Stirling's series at `x >= 10`; smaller arguments are shifted up with the
/// recurrence `Gamma(x + 1) = x Gamma(x)`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::NonPositiveArgument(x));
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < 10.0 {
        prod *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    Ok((z - 0.5) * z.ln() - z + HALF_LN_2PI + series - prod.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((log_gamma(0.5).unwrap() - sqrt_pi.ln()).abs() < 1e-14);
        assert!((log_gamma(10.0).unwrap() - 362_880f64.ln()).abs() < 1e-13);
        assert!((log_gamma(1.5).unwrap() - (sqrt_pi / 2.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn factorials() {
        let mut fact = 1.0f64;
        for n in 1..30u32 {
            // Gamma(n + 1) = n!
            fact *= n as f64;
            let lg = log_gamma(n as f64 + 1.0).unwrap();
            assert!(
                (lg - fact.ln()).abs() <= 1e-13 * lg.abs().max(1.0),
                "n = {n}"
            );
        }
    }

    #[test]
    fn small_arguments() {
        // Gamma(x) ~ 1/x - gamma_E near 0
        let x: f64 = 1e-2;
        let euler = 0.577_215_664_901_532_9;
        let expected = (1.0 / x - euler + 0.989_055_995_327_973 * x).ln();
        assert!((log_gamma(x).unwrap() - expected).abs() < 1e-5);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }
}
