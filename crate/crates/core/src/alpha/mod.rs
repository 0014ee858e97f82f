//! The alpha-concave algebra: convex bases, support functions, alpha-sums,
//! homotheties, convex combinations and the membership test.
//!
//! Everything works through the convex base `(1 - f^alpha)/alpha`; an
//! [`AlphaFn`] caches it next to the mass so downstream operations never
//! recompute `f^alpha` near `f = 0`.

mod concavity;
mod param;
mod zoo;

pub use concavity::{is_alpha_concave, ConcavityReport};
pub use param::{AlphaParam, MASS_FLOOR};
pub use zoo::{Body, FunctionDescriptor};

use crate::error::{Error, Result};
use crate::extgrid::{GridFn, GridSpec, Point, Side};
use crate::lft;

/// Pointwise convex base of a mass-side function.
pub fn base(f: &GridFn, param: AlphaParam) -> Result<GridFn> {
    f.require_side(Side::Mass)?;
    let values = f.values().iter().map(|&v| param.base_value(v)).collect();
    GridFn::new(f.spec().clone(), Side::Convex, values)
}

/// Pointwise inverse of [`base`]: `(1 + phi/beta)^(-beta)`.
pub fn unbase(phi: &GridFn, param: AlphaParam) -> Result<GridFn> {
    phi.require_side(Side::Convex)?;
    let neg_beta = -param.beta();
    if let Some(index) = phi.values().iter().position(|&v| v <= neg_beta) {
        return Err(Error::DomainViolation {
            index,
            value: phi.value(index),
            neg_beta,
        });
    }
    let values = phi.values().iter().map(|&v| param.mass_value(v)).collect();
    GridFn::new(phi.spec().clone(), Side::Mass, values)
}

/// An alpha-concave function on a grid with its cached convex base.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFn {
    param: AlphaParam,
    mass: GridFn,
    base: GridFn,
}

/// Tolerance for discrete convexity of a base along grid lines.
const CONVEXITY_TOL: f64 = 1e-10;

impl AlphaFn {
    /// Builds from a mass; fails unless the base is convex along grid lines.
    pub fn from_mass(mass: GridFn, param: AlphaParam) -> Result<Self> {
        let base = base(&mass, param)?;
        if let Some(index) = lft::first_convexity_violation(&base, CONVEXITY_TOL) {
            return Err(Error::NotConvex { index });
        }
        Ok(Self { param, mass, base })
    }

    /// Builds from a convex base (must stay above -beta).
    pub fn from_base(base: GridFn, param: AlphaParam) -> Result<Self> {
        if let Some(index) = lft::first_convexity_violation(&base, CONVEXITY_TOL) {
            return Err(Error::NotConvex { index });
        }
        Self::from_base_unchecked(base, param)
    }

    /// Results of the algebra: only the -beta bound is enforced.
    fn from_base_unchecked(base: GridFn, param: AlphaParam) -> Result<Self> {
        let mass = unbase(&base, param)?;
        Ok(Self { param, mass, base })
    }

    pub fn param(&self) -> AlphaParam {
        self.param
    }

    pub fn mass(&self) -> &GridFn {
        &self.mass
    }

    pub fn base(&self) -> &GridFn {
        &self.base
    }

    pub fn spec(&self) -> &GridSpec {
        self.mass.spec()
    }

    pub fn integral(&self) -> f64 {
        self.mass.integrate().expect("mass side")
    }

    /// The same function on every other node.
    pub fn coarsen(&self) -> Option<AlphaFn> {
        Some(AlphaFn {
            param: self.param,
            mass: self.mass.coarsen()?,
            base: self.base.coarsen()?,
        })
    }
}

/// `G_alpha(x) = (1 + |x|^2/(2 beta))^(-beta)`, whose base is `|x|^2/2` exactly.
pub fn make_g_alpha(spec: &GridSpec, param: AlphaParam) -> Result<AlphaFn> {
    let base = GridFn::from_fn(spec.clone(), Side::Convex, |x| {
        crate::extgrid::norm_sq(x) / 2.0
    })?;
    AlphaFn::from_base_unchecked(base, param)
}

/// `h_f = (base f)^*` on the dual grid.
pub fn support_function(f: &AlphaFn, dual: &GridSpec) -> Result<GridFn> {
    lft::legendre(&f.base, dual)
}

fn check_operands(f: &AlphaFn, g: &AlphaFn) -> Result<()> {
    if f.param != g.param {
        return Err(Error::ParamMismatch);
    }
    if f.spec() != g.spec() {
        return Err(Error::SpecMismatch);
    }
    Ok(())
}

/// `f ⋆_alpha g`, defined by `base(f ⋆ g) = base f □ base g`.
pub fn alpha_sum(f: &AlphaFn, g: &AlphaFn) -> Result<AlphaFn> {
    check_operands(f, g)?;
    let base = lft::inf_convolve(&f.base, &g.base)?;
    let neg_beta = -f.param.beta();
    if let Some(index) = base.values().iter().position(|&v| v <= neg_beta) {
        return Err(Error::SumUndefined {
            index,
            value: base.value(index),
        });
    }
    AlphaFn::from_base_unchecked(base, f.param)
}

/// `lambda ·_alpha f`, defined by `base(lambda · f)(x) = lambda (base f)(x / lambda)`.
pub fn alpha_scale(lambda: f64, f: &AlphaFn) -> Result<AlphaFn> {
    let (base, _) = rescale_base(f.base(), lambda)?;
    AlphaFn::from_base_unchecked(base, f.param)
}

/// `x -> lambda phi(x / lambda)` on the same grid, interpolating `phi`
/// linearly between nodes (nearest node in cells touching +inf). Points whose
/// preimage leaves the box become +inf; their count is returned.
pub fn rescale_base(phi: &GridFn, lambda: f64) -> Result<(GridFn, usize)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveScale(lambda));
    }
    phi.require_side(Side::Convex)?;
    let spec = phi.spec();
    let mut outside = 0;
    let values = (0..spec.len())
        .map(|k| {
            let p = spec.point(k);
            match interpolate(spec, phi.values(), &[p[0] / lambda, p[1] / lambda]) {
                Some(v) => lambda * v,
                None => {
                    outside += 1;
                    f64::INFINITY
                }
            }
        })
        .collect();
    Ok((GridFn::new(spec.clone(), Side::Convex, values)?, outside))
}

/// Multilinear interpolation of grid values at `p`; `None` outside the box.
/// Coordinates within 1e-9 cells of a node snap to it. Cells with a +inf
/// corner take the nearest node's value, so supports are neither eroded nor
/// dilated on average.
pub(crate) fn interpolate(spec: &GridSpec, vals: &[f64], p: &Point) -> Option<f64> {
    let mut corners = [[(0usize, 1.0f64); 2]; 2];
    let mut counts = [1usize; 2];
    for (a, axis) in spec.axes().iter().enumerate() {
        let t = (p[a] - axis.lo) / axis.spacing();
        let last = (axis.m - 1) as f64;
        if t < -1e-9 || t > last + 1e-9 {
            return None;
        }
        let r = t.round();
        if (t - r).abs() < 1e-9 {
            corners[a][0] = (r as usize, 1.0);
        } else {
            let i = t.floor() as usize;
            let w = t - i as f64;
            corners[a] = [(i, 1.0 - w), (i + 1, w)];
            counts[a] = 2;
        }
    }
    let m1 = spec.shape()[1];
    let mut acc = 0.0;
    let mut nearest = (0usize, -1.0f64);
    for &(i0, w0) in &corners[0][..counts[0]] {
        for &(i1, w1) in &corners[1][..counts[1]] {
            let k = i0 * m1 + i1;
            let w = w0 * w1;
            // ties go to the +inf corner so exact half-cell points stay outside
            if w > nearest.1 + 1e-12 || (w > nearest.1 - 1e-12 && vals[k] == f64::INFINITY) {
                nearest = (k, w);
            }
            acc += w0 * w1 * vals[k];
        }
    }
    if acc.is_finite() {
        Some(acc)
    } else {
        Some(vals[nearest.0])
    }
}

/// `[lambda · f] ⋆ [(1 - lambda) · g]` by the direct sup formula
/// `sup_{y+z=x} [lambda f(y/lambda)^alpha + (1-lambda) g(z/(1-lambda))^alpha]^(1/alpha)`.
///
/// Off-grid values `f(y/lambda)` come from the linearly interpolated base, as
/// in [`alpha_scale`], so the result equals
/// `alpha_sum(alpha_scale(lambda, f), alpha_scale(1 - lambda, g))` up to
/// rounding. At alpha = 0 it is the sup-convolution of `f(y/lambda)^lambda`
/// and `g(z/(1-lambda))^(1-lambda)`.
pub fn convex_combination(lambda: f64, f: &AlphaFn, g: &AlphaFn) -> Result<AlphaFn> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    check_operands(f, g)?;
    let spec = f.spec();
    let param = f.param;
    let origin = spec.origin()?;
    let stretched = |h: &AlphaFn, s: f64| -> Vec<f64> {
        (0..spec.len())
            .map(|k| {
                let p = spec.point(k);
                interpolate(spec, h.base.values(), &[p[0] / s, p[1] / s])
                    .map_or(0.0, |v| param.mass_value(v))
            })
            .collect()
    };
    let fs = stretched(f, lambda);
    let gs = stretched(g, 1.0 - lambda);

    if param.is_log_concave() {
        let a: Vec<f64> = fs.iter().map(|v| v.powf(lambda)).collect();
        let b: Vec<f64> = gs.iter().map(|v| v.powf(1.0 - lambda)).collect();
        let h = lft::sup_convolve(
            &GridFn::new(spec.clone(), Side::Mass, a)?,
            &GridFn::new(spec.clone(), Side::Mass, b)?,
        )?;
        return AlphaFn::from_base_unchecked(base(&h, param)?, param);
    }

    let a: Vec<f64> = fs.iter().map(|&v| lambda * param.power(v)).collect();
    let b: Vec<f64> = gs
        .iter()
        .map(|&v| (1.0 - lambda) * param.power(v))
        .collect();
    let fa: Vec<usize> = (0..a.len()).filter(|&i| a[i].is_finite()).collect();
    let fb: Vec<usize> = (0..b.len()).filter(|&j| b[j].is_finite()).collect();
    let [m0, m1] = spec.shape();
    let bi: Vec<[usize; 2]> = fb.iter().map(|&j| spec.multi_index(j)).collect();
    let mut best = vec![f64::INFINITY; spec.len()];
    for &i in &fa {
        let ii = spec.multi_index(i);
        let ai = a[i];
        for (&j, jj) in fb.iter().zip(&bi) {
            let (s0, s1) = (ii[0] + jj[0], ii[1] + jj[1]);
            if s0 < origin[0] || s1 < origin[1] {
                continue;
            }
            let (k0, k1) = (s0 - origin[0], s1 - origin[1]);
            if k0 < m0 && k1 < m1 {
                let k = k0 * m1 + k1;
                let v = ai + b[j];
                if v < best[k] {
                    best[k] = v;
                }
            }
        }
    }
    let mass: Vec<f64> = best
        .iter()
        .map(|&c| {
            if c.is_finite() {
                c.powf(1.0 / param.alpha())
            } else {
                0.0
            }
        })
        .collect();
    let mass = GridFn::new(spec.clone(), Side::Mass, mass)?;
    let base = base(&mass, param)?;
    Ok(AlphaFn { param, mass, base })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn line(lo: f64, hi: f64, m: usize) -> GridSpec {
        GridSpec::line(lo, hi, m).unwrap()
    }

    fn indicator(spec: &GridSpec, lo: f64, hi: f64, p: AlphaParam) -> AlphaFn {
        FunctionDescriptor::Indicator(Body::interval(lo, hi))
            .to_alpha_fn(spec, p)
            .unwrap()
    }

    fn params() -> Vec<AlphaParam> {
        [1.0, 2.0, 2.5, 10.0, INF]
            .iter()
            .map(|&b| AlphaParam::from_beta(b).unwrap())
            .collect()
    }

    #[test]
    fn base_of_indicator_is_convex_indicator() {
        let s = line(-2.0, 2.0, 5);
        for p in params() {
            let f = GridFn::new(s.clone(), Side::Mass, vec![0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
            assert_eq!(base(&f, p).unwrap().values(), &[INF, 0.0, 0.0, 0.0, INF]);
            let back = unbase(&base(&f, p).unwrap(), p).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn base_of_gaussian_is_half_square() {
        let s = line(-3.0, 3.0, 61);
        let f = GridFn::from_fn(s.clone(), Side::Mass, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
        let b = base(&f, AlphaParam::log_concave()).unwrap();
        for k in 0..s.len() {
            let x = s.point(k)[0];
            assert!((b.value(k) - x * x / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn base_and_unbase_for_beta_two() {
        let p = AlphaParam::from_beta(2.0).unwrap();
        let s = line(-2.0, 2.0, 5);
        let phi = GridFn::from_fn(s.clone(), Side::Convex, |x| x[0] * x[0] / 2.0).unwrap();
        let f = unbase(&phi, p).unwrap();
        for k in 0..5 {
            let x = s.point(k)[0];
            assert!((f.value(k) - (1.0 + x * x / 4.0).powi(-2)).abs() < 1e-15);
        }
        assert!((f.value(4) - 0.25).abs() < 1e-15);
        assert!((base(&f, p).unwrap().value(4) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn unbase_of_constant() {
        let p = AlphaParam::from_beta(1.0).unwrap();
        let phi = GridFn::new(line(-1.0, 1.0, 3), Side::Convex, vec![-0.75; 3]).unwrap();
        let f = unbase(&phi, p).unwrap();
        assert!(f.values().iter().all(|v| (v - 4.0).abs() < 1e-14));
        let bad = GridFn::new(line(-1.0, 1.0, 3), Side::Convex, vec![0.0, -1.0, 0.0]).unwrap();
        assert!(matches!(
            unbase(&bad, p),
            Err(Error::DomainViolation { index: 1, .. })
        ));
    }

    #[test]
    fn support_function_of_interval() {
        let s = line(-2.0, 2.0, 401);
        let d = line(-3.0, 3.0, 121);
        for p in params() {
            let h = support_function(&indicator(&s, -1.0, 1.0, p), &d).unwrap();
            for k in 0..d.len() {
                assert!((h.value(k) - d.point(k)[0].abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn support_function_of_g_alpha_and_tilt() {
        let s = line(-6.0, 6.0, 1201);
        let d = line(-3.0, 3.0, 301);
        let h2 = d.spacing(0).powi(2);
        for p in params() {
            let h = support_function(&make_g_alpha(&s, p).unwrap(), &d).unwrap();
            for k in 0..d.len() {
                let y = d.point(k)[0];
                assert!((h.value(k) - y * y / 2.0).abs() <= 2.0 * h2);
            }
        }
        let tilt = FunctionDescriptor::LinearTilt {
            slope: vec![1.0],
            offset: 0.0,
        }
        .to_alpha_fn(&s, AlphaParam::log_concave())
        .unwrap();
        let h = support_function(&tilt, &d).unwrap();
        for k in 0..d.len() {
            let y = d.point(k)[0];
            assert!((h.value(k) - (y - 1.0).powi(2) / 2.0).abs() <= 2.0 * h2);
        }
    }

    #[test]
    fn sum_of_indicators() {
        let s = line(-4.0, 4.0, 81);
        for p in params() {
            let k = indicator(&s, -1.0, 1.0, p);
            let t = indicator(&s, 0.0, 2.0, p);
            let sum = alpha_sum(&k, &t).unwrap();
            assert_eq!(sum, indicator(&s, -1.0, 3.0, p));
            let zero = indicator(&s, 0.0, 0.0, p);
            let g = make_g_alpha(&s, p).unwrap();
            assert_eq!(alpha_sum(&g, &zero).unwrap().base(), g.base());
        }
    }

    #[test]
    fn sum_undefined_below_minus_beta() {
        let p = AlphaParam::from_beta(1.0).unwrap();
        let s = line(-1.0, 1.0, 3);
        let c = GridFn::new(s, Side::Convex, vec![-0.75; 3]).unwrap();
        let f = AlphaFn::from_base(c, p).unwrap();
        assert!(matches!(alpha_sum(&f, &f), Err(Error::SumUndefined { .. })));
    }

    #[test]
    fn scale_indicator_and_quadratic() {
        let s = line(-4.0, 4.0, 161);
        for p in params() {
            let k = indicator(&s, -1.0, 1.0, p);
            assert_eq!(alpha_scale(2.0, &k).unwrap(), indicator(&s, -2.0, 2.0, p));
            assert_eq!(alpha_scale(0.5, &k).unwrap(), indicator(&s, -0.5, 0.5, p));
            assert_eq!(alpha_scale(1.0, &k).unwrap(), k);
        }
        let g = make_g_alpha(&s, AlphaParam::from_beta(2.0).unwrap()).unwrap();
        let g2 = alpha_scale(2.0, &g).unwrap();
        let h = s.spacing(0);
        for k in 0..s.len() {
            let x = s.point(k)[0];
            assert!((g2.base().value(k) - x * x / 4.0).abs() <= h * h);
        }
        assert!(matches!(
            alpha_scale(0.0, &g),
            Err(Error::NonPositiveScale(_))
        ));
        assert!(matches!(
            alpha_scale(-1.0, &g),
            Err(Error::NonPositiveScale(_))
        ));
    }

    #[test]
    fn rescale_counts_points_outside() {
        let s = line(-2.0, 2.0, 5);
        let phi = GridFn::new(s, Side::Convex, vec![1.0; 5]).unwrap();
        let (out, outside) = rescale_base(&phi, 0.5).unwrap();
        assert_eq!(outside, 2);
        assert_eq!(out.values(), &[INF, 0.5, 0.5, 0.5, INF]);
    }

    #[test]
    fn combination_of_equal_functions_is_identity() {
        let s = line(-8.0, 8.0, 801);
        let h = s.spacing(0);
        for p in params() {
            let g = make_g_alpha(&s, p).unwrap();
            let c = convex_combination(0.5, &g, &g).unwrap();
            for k in 0..s.len() {
                assert!((c.mass().value(k) - g.mass().value(k)).abs() <= 2.0 * h);
            }
        }
    }

    #[test]
    fn combination_of_indicators() {
        let s = line(-4.0, 4.0, 161);
        for p in params() {
            let k = indicator(&s, 0.0, 2.0, p);
            let t = indicator(&s, 0.0, 4.0, p);
            let c = convex_combination(0.5, &k, &t).unwrap();
            assert_eq!(c.mass(), indicator(&s, 0.0, 3.0, p).mass());
        }
    }

    #[test]
    fn combination_rejects_bad_lambda() {
        let s = line(-1.0, 1.0, 5);
        let g = make_g_alpha(&s, AlphaParam::log_concave()).unwrap();
        assert!(matches!(
            convex_combination(1.0, &g, &g),
            Err(Error::InvalidLambda(_))
        ));
        let other = make_g_alpha(&s, AlphaParam::from_beta(3.0).unwrap()).unwrap();
        assert_eq!(
            convex_combination(0.5, &g, &other),
            Err(Error::ParamMismatch)
        );
    }

    #[test]
    fn g_alpha_values() {
        let s = line(-2.0, 2.0, 5);
        let g = make_g_alpha(&s, AlphaParam::from_beta(2.0).unwrap()).unwrap();
        assert!((g.mass().value(4) - 0.25).abs() < 1e-15);
        let g1 = make_g_alpha(&s, AlphaParam::from_beta(1.0).unwrap()).unwrap();
        assert_eq!(g1.mass().value(2), 1.0);
        let g0 = make_g_alpha(&s, AlphaParam::log_concave()).unwrap();
        assert!((g0.mass().value(0) - (-2.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn alpha_transform_of_log_concave_functions_is_not_additive() {
        // T f = (base_alpha f)^* applied to log-concave f, compared with the
        // log-concave sum f ⋆ f = exp(-x^2/4)
        let s = line(-8.0, 8.0, 1601);
        let d = line(-1.0, 1.0, 41);
        let lc = AlphaParam::log_concave();
        let p = AlphaParam::from_beta(2.0).unwrap();
        let gauss = make_g_alpha(&s, lc).unwrap();
        let sum = alpha_sum(&gauss, &gauss).unwrap();
        let t = |f: &AlphaFn| lft::legendre(&base(f.mass(), p).unwrap(), &d).unwrap();
        let (tf, tsum) = (t(&gauss), t(&sum));
        let h = support_function(&gauss, &d).unwrap();
        let gap_from_h = (0..d.len())
            .map(|k| (tf.value(k) - h.value(k)).abs())
            .fold(0.0, f64::max);
        let gap_additive = (0..d.len())
            .map(|k| (tsum.value(k) - 2.0 * tf.value(k)).abs())
            .fold(0.0, f64::max);
        assert!(gap_from_h > 0.01, "{gap_from_h}");
        assert!(gap_additive > 0.01, "{gap_additive}");
        // on indicators it agrees with the support function
        let k = indicator(&s, -1.0, 1.0, lc);
        assert_eq!(t(&k), support_function(&k, &d).unwrap());
    }

    #[test]
    fn from_mass_rejects_non_concave() {
        let s = line(-2.0, 2.0, 5);
        let f = GridFn::new(s, Side::Mass, vec![1.0, 0.1, 1.0, 0.1, 1.0]).unwrap();
        assert!(matches!(
            AlphaFn::from_mass(f, AlphaParam::log_concave()),
            Err(Error::NotConvex { .. })
        ));
    }
}
