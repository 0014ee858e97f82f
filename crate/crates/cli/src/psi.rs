//! Test functions for the Poincare and variation checks.

use std::fmt;
use std::str::FromStr;

use acalc::extgrid::{GridFn, GridSpec, Side};

/// `linear`, `square`, `cos`, `capped:c` or `poly:c0,c1,c2`.
#[derive(Debug, Clone, PartialEq)]
pub enum Psi {
    /// `x_1`.
    Linear,
    /// `|x|^2`.
    Square,
    /// `cos x_1`.
    Cos,
    /// `min(|x|^2, c)`.
    Capped(f64),
    /// `c0 + c1 x_1 + c2 |x|^2`.
    Poly([f64; 3]),
}

impl Psi {
    fn eval(&self, x: &[f64], dim: usize) -> f64 {
        let r2: f64 = x[..dim].iter().map(|v| v * v).sum();
        match self {
            Psi::Linear => x[0],
            Psi::Square => r2,
            Psi::Cos => x[0].cos(),
            Psi::Capped(c) => r2.min(*c),
            Psi::Poly([c0, c1, c2]) => c0 + c1 * x[0] + c2 * r2,
        }
    }

    pub fn sample(&self, spec: &GridSpec) -> acalc::Result<GridFn> {
        let dim = spec.dim();
        GridFn::from_fn(spec.clone(), Side::Convex, |x| self.eval(x, dim))
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Linear => write!(f, "linear"),
            Psi::Square => write!(f, "square"),
            Psi::Cos => write!(f, "cos"),
            Psi::Capped(c) => write!(f, "capped:{c}"),
            Psi::Poly([a, b, c]) => write!(f, "poly:{a},{b},{c}"),
        }
    }
}

impl FromStr for Psi {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>, String> {
            rest.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| format!("bad number `{t}` in `{s}`: {e}"))
                })
                .collect()
        };
        match head {
            "linear" | "x" => Ok(Psi::Linear),
            "square" | "x2" => Ok(Psi::Square),
            "cos" => Ok(Psi::Cos),
            "capped" => match nums()?.as_slice() {
                [c] if c.is_finite() => Ok(Psi::Capped(*c)),
                _ => Err(format!("`{s}`: expected capped:c")),
            },
            "poly" => match nums()?.as_slice() {
                [a, b, c] if a.is_finite() && b.is_finite() && c.is_finite() => {
                    Ok(Psi::Poly([*a, *b, *c]))
                }
                _ => Err(format!("`{s}`: expected poly:c0,c1,c2")),
            },
            _ => Err(format!("unknown test function `{s}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for s in ["linear", "square", "cos", "capped:4", "poly:1,-2,0.5"] {
            let p: Psi = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!("x2".parse::<Psi>().unwrap(), Psi::Square);
        assert!("capped".parse::<Psi>().is_err());
        assert!("poly:1,2".parse::<Psi>().is_err());
        assert!("sin".parse::<Psi>().is_err());
    }

    #[test]
    fn values() {
        let spec = GridSpec::line(-3.0, 3.0, 7).unwrap();
        let v = Psi::Capped(4.0).sample(&spec).unwrap();
        assert_eq!(v.values(), &[4.0, 4.0, 1.0, 0.0, 1.0, 4.0, 4.0]);
        let p = Psi::Poly([1.0, 2.0, 3.0]).sample(&spec).unwrap();
        assert_eq!(p.value(4), 6.0);
    }
}
