//! Standard test families and their textual form.
//!
//! Vector parameters of length 1 broadcast to every axis, so `indicator:-1,1`
//! is the interval in 1D and the square in 2D.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{base, AlphaFn, AlphaParam};
use crate::error::{Error, Result};
use crate::extgrid::{GridFn, GridSpec, Point, Side};

/// A convex body for indicator functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Body {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Body::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    /// The single point `{0}`.
    pub fn origin() -> Self {
        Body::interval(0.0, 0.0)
    }

    fn validate(&self) -> Result<()> {
        match self {
            Body::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::InvalidParameter("box needs matching lo/hi".into()));
                }
                if lo
                    .iter()
                    .zip(hi)
                    .any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
                {
                    return Err(Error::InvalidParameter("box needs finite lo <= hi".into()));
                }
            }
            Body::Ball { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter("ball center must be finite".into()));
                }
            }
        }
        Ok(())
    }

    fn contains(&self, x: &Point, dim: usize, tol: f64) -> bool {
        match self {
            Body::Box { lo, hi } => {
                (0..dim).all(|a| x[a] >= at(lo, a) - tol && x[a] <= at(hi, a) + tol)
            }
            Body::Ball { center, radius } => {
                let d2: f64 = (0..dim).map(|a| (x[a] - at(center, a)).powi(2)).sum();
                d2.sqrt() <= radius + tol
            }
        }
    }
}

/// Component `a` with broadcasting of length-1 vectors; empty means zero.
fn at(v: &[f64], a: usize) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        _ => v[a],
    }
}

/// A member of the standard test zoo.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionDescriptor {
    /// `1_K`.
    Indicator(Body),
    /// Base `|x - center|^2 / (2 scale)`.
    QuadraticBase { center: Vec<f64>, scale: f64 },
    /// `G_alpha` for the sampling parameter.
    GAlpha,
    /// Base `|x|^2/2 + <slope, x> + offset`.
    LinearTilt { slope: Vec<f64>, offset: f64 },
    /// Mass values listed in grid order.
    UserTable(Vec<f64>),
}

impl FunctionDescriptor {
    fn check_dims(&self, dim: usize) -> Result<()> {
        let ok = |v: &[f64]| v.len() <= 1 || v.len() == dim;
        let fits = match self {
            FunctionDescriptor::Indicator(Body::Box { lo, hi }) => ok(lo) && ok(hi),
            FunctionDescriptor::Indicator(Body::Ball { center, .. }) => ok(center),
            FunctionDescriptor::QuadraticBase { center, .. } => ok(center),
            FunctionDescriptor::LinearTilt { slope, .. } => ok(slope),
            _ => true,
        };
        if fits {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "descriptor `{self}` does not fit dimension {dim}"
            )))
        }
    }

    /// Samples the descriptor on `spec`. Convex side yields the base for `param`.
    pub fn sample(&self, spec: &GridSpec, side: Side, param: AlphaParam) -> Result<GridFn> {
        let dim = spec.dim();
        self.check_dims(dim)?;
        if let FunctionDescriptor::UserTable(values) = self {
            let mass = GridFn::new(spec.clone(), Side::Mass, values.clone())?;
            return match side {
                Side::Mass => Ok(mass),
                Side::Convex => base(&mass, param),
            };
        }
        let tol = 1e-9 * spec.max_spacing();
        let convex = match self {
            FunctionDescriptor::Indicator(body) => {
                body.validate()?;
                GridFn::from_fn(spec.clone(), Side::Convex, |x| {
                    if body.contains(x, dim, tol) {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                })?
            }
            FunctionDescriptor::QuadraticBase { center, scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "quadratic scale must be positive, got {scale}"
                    )));
                }
                GridFn::from_fn(spec.clone(), Side::Convex, |x| {
                    let d2: f64 = (0..dim).map(|a| (x[a] - at(center, a)).powi(2)).sum();
                    d2 / (2.0 * scale)
                })?
            }
            FunctionDescriptor::GAlpha => GridFn::from_fn(spec.clone(), Side::Convex, |x| {
                (0..dim).map(|a| x[a] * x[a]).sum::<f64>() / 2.0
            })?,
            FunctionDescriptor::LinearTilt { slope, offset } => {
                GridFn::from_fn(spec.clone(), Side::Convex, |x| {
                    (0..dim)
                        .map(|a| x[a] * x[a] / 2.0 + at(slope, a) * x[a])
                        .sum::<f64>()
                        + offset
                })?
            }
            FunctionDescriptor::UserTable(_) => unreachable!(),
        };
        match side {
            Side::Convex => Ok(convex),
            Side::Mass => super::unbase(&convex, param),
        }
    }

    pub fn to_alpha_fn(&self, spec: &GridSpec, param: AlphaParam) -> Result<AlphaFn> {
        match self {
            FunctionDescriptor::UserTable(_) => {
                AlphaFn::from_mass(self.sample(spec, Side::Mass, param)?, param)
            }
            _ => AlphaFn::from_base(self.sample(spec, Side::Convex, param)?, param),
        }
    }

    /// A random member with mass at most 1 and support near the origin.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let vec = |rng: &mut R, lo: f64, hi: f64| -> Vec<f64> {
            (0..dim).map(|_| rng.gen_range(lo..hi)).collect()
        };
        match rng.gen_range(0..5) {
            0 => {
                let lo = vec(rng, -1.5, -0.2);
                let hi = vec(rng, 0.2, 1.5);
                FunctionDescriptor::Indicator(Body::Box { lo, hi })
            }
            1 => FunctionDescriptor::Indicator(Body::Ball {
                center: vec(rng, -0.3, 0.3),
                radius: rng.gen_range(0.5..1.5),
            }),
            2 => FunctionDescriptor::QuadraticBase {
                center: vec(rng, -1.0, 1.0),
                scale: rng.gen_range(0.5..2.0),
            },
            3 => FunctionDescriptor::GAlpha,
            _ => {
                let slope = vec(rng, -1.0, 1.0);
                let half_sq: f64 = slope.iter().map(|a| a * a).sum::<f64>() / 2.0;
                FunctionDescriptor::LinearTilt {
                    slope,
                    offset: half_sq + rng.gen_range(0.0..0.5),
                }
            }
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for FunctionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionDescriptor::Indicator(Body::Box { lo, hi })
                if lo.iter().chain(hi).all(|&v| v == 0.0) && lo.len() == 1 =>
            {
                write!(f, "point")
            }
            FunctionDescriptor::Indicator(Body::Box { lo, hi }) => {
                let pairs: Vec<f64> = lo.iter().zip(hi).flat_map(|(a, b)| [*a, *b]).collect();
                write!(f, "indicator:{}", join(&pairs))
            }
            FunctionDescriptor::Indicator(Body::Ball { center, radius }) => {
                if center.iter().all(|&c| c == 0.0) {
                    write!(f, "ball:{radius}")
                } else {
                    write!(f, "ball:{radius}:{}", join(center))
                }
            }
            FunctionDescriptor::QuadraticBase { center, scale } => {
                write!(f, "quadratic:{}:{scale}", join(center))
            }
            FunctionDescriptor::GAlpha => write!(f, "g_alpha"),
            FunctionDescriptor::LinearTilt { slope, offset } => {
                write!(f, "tilt:{}:{offset}", join(slope))
            }
            FunctionDescriptor::UserTable(values) => write!(f, "table:{}", join(values)),
        }
    }
}

impl FromStr for FunctionDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse(s.to_string());
        let nums = |t: &str| -> Result<Vec<f64>> {
            t.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| err()))
                .collect()
        };
        let parts: Vec<&str> = s.trim().split(':').collect();
        let d = match parts.as_slice() {
            ["g_alpha"] => FunctionDescriptor::GAlpha,
            ["point"] => FunctionDescriptor::Indicator(Body::origin()),
            ["indicator", v] => {
                let v = nums(v)?;
                if v.is_empty() || v.len() % 2 != 0 {
                    return Err(err());
                }
                let lo = v.iter().step_by(2).copied().collect();
                let hi = v.iter().skip(1).step_by(2).copied().collect();
                FunctionDescriptor::Indicator(Body::Box { lo, hi })
            }
            ["ball", r] => FunctionDescriptor::Indicator(Body::Ball {
                center: vec![0.0],
                radius: r.trim().parse().map_err(|_| err())?,
            }),
            ["ball", r, c] => FunctionDescriptor::Indicator(Body::Ball {
                center: nums(c)?,
                radius: r.trim().parse().map_err(|_| err())?,
            }),
            ["quadratic", c, scale] => FunctionDescriptor::QuadraticBase {
                center: nums(c)?,
                scale: scale.trim().parse().map_err(|_| err())?,
            },
            ["tilt", a, c] => FunctionDescriptor::LinearTilt {
                slope: nums(a)?,
                offset: c.trim().parse().map_err(|_| err())?,
            },
            ["table", v] => FunctionDescriptor::UserTable(nums(v)?),
            _ => return Err(err()),
        };
        if let FunctionDescriptor::Indicator(body) = &d {
            body.validate()?;
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn parse_and_print() {
        for s in [
            "g_alpha",
            "point",
            "indicator:-1,1",
            "indicator:-1,1,0,2",
            "ball:1.5",
            "ball:1:0.5,0",
            "quadratic:0.5:2",
            "tilt:1,-1:0.25",
            "table:0,1,0.5",
        ] {
            let d: FunctionDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        for bad in [
            "",
            "indicator:1",
            "ball:-1",
            "indicator:2,1",
            "quadratic:0",
            "nope",
        ] {
            assert!(bad.parse::<FunctionDescriptor>().is_err(), "{bad}");
        }
    }

    #[test]
    fn ball_in_the_plane() {
        let s = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        let f = FunctionDescriptor::Indicator(Body::Ball {
            center: vec![0.0],
            radius: 1.0,
        })
        .sample(&s, Side::Mass, AlphaParam::log_concave())
        .unwrap();
        let inside = f.values().iter().filter(|&&v| v == 1.0).count();
        // lattice points of spacing 0.1 in the unit disc
        let expected = (-10i32..=10)
            .flat_map(|i| (-10i32..=10).map(move |j| (i, j)))
            .filter(|(i, j)| i * i + j * j <= 100)
            .count();
        assert_eq!(inside, expected);
    }

    #[test]
    fn broadcasting_and_dimension_checks() {
        let s = GridSpec::cube(2, -1.0, 1.0, 5).unwrap();
        let sq: FunctionDescriptor = "indicator:-0.5,0.5".parse().unwrap();
        let f = sq
            .sample(&s, Side::Mass, AlphaParam::log_concave())
            .unwrap();
        assert_eq!(f.values().iter().filter(|&&v| v == 1.0).count(), 9);
        let three = FunctionDescriptor::LinearTilt {
            slope: vec![1.0, 2.0, 3.0],
            offset: 0.0,
        };
        assert!(three
            .sample(&s, Side::Convex, AlphaParam::log_concave())
            .is_err());
    }

    #[test]
    fn negative_table_entry_is_rejected_with_index() {
        let s = GridSpec::line(-1.0, 1.0, 3).unwrap();
        let t = FunctionDescriptor::UserTable(vec![0.5, -1.0, 0.5]);
        assert!(matches!(
            t.sample(&s, Side::Mass, AlphaParam::log_concave()),
            Err(Error::InvalidMass { index: 1, .. })
        ));
    }

    #[test]
    fn random_members_are_valid_and_bounded() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let s = GridSpec::cube(2, -3.0, 3.0, 31).unwrap();
        for _ in 0..50 {
            let d = FunctionDescriptor::random(&mut rng, 2);
            for beta in [2.5, f64::INFINITY] {
                let p = AlphaParam::from_beta(beta).unwrap();
                let f = d.to_alpha_fn(&s, p).unwrap();
                assert!(f.mass().values().iter().all(|&v| v <= 1.0 + 1e-15));
            }
        }
    }
}
