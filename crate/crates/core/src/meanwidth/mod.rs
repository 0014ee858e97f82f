//! The alpha-mean width and the closed forms around `G_alpha`.
//!
//! Two independent routes are provided. The representation route integrates
//! the support function against the order-1 weight. The limit route
//! differentiates `eps -> ∫ G ⋆ (eps · f)` numerically, using
//! `base(G ⋆ eps·f)(x) = |x|^2/2 - eps (phi + eps|z|^2/2)^*(x)`, which needs one
//! transform per `eps` and no inf-convolution.

mod gamma;

pub use gamma::log_gamma;

use serde::Serialize;

use crate::alpha::{support_function, unbase, AlphaFn, AlphaParam};
use crate::error::{Error, Result};
use crate::extgrid::{norm_sq, quadrature, GridFn, GridSpec, Point, Side};
use crate::lft;

/// `∫ (1/shrink)·G_alpha = (2 pi beta / shrink)^(n/2) Gamma(beta - n/2) / Gamma(beta)`.
pub fn integral_g_alpha(n: usize, beta: f64, shrink: f64) -> Result<f64> {
    if !(shrink > 0.0 && shrink <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "shrink must lie in (0, 1], got {shrink}"
        )));
    }
    let half_n = n as f64 / 2.0;
    if beta.is_infinite() {
        return Ok((2.0 * std::f64::consts::PI / shrink).powf(half_n));
    }
    if !(beta > half_n) {
        return Err(Error::DivergentIntegral { beta, half_n });
    }
    let lg = log_gamma(beta - half_n)? - log_gamma(beta)?;
    Ok((2.0 * std::f64::consts::PI * beta / shrink).powf(half_n) * lg.exp())
}

/// `(1 + |x|^2/(2 beta))^(-beta - order)`, or `exp(-|x|^2/2)` at beta = inf.
pub fn weight_kernel(x: &Point, beta: f64, order: u32) -> Result<f64> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    Ok(weight(norm_sq(x), beta, order as f64))
}

#[inline]
pub(crate) fn weight(r2: f64, beta: f64, order: f64) -> f64 {
    if beta.is_infinite() {
        (-r2 / 2.0).exp()
    } else {
        (-(beta + order) * (r2 / (2.0 * beta)).ln_1p()).exp()
    }
}

/// Surface area of the unit sphere in R^n for n = 1, 2.
fn sphere_area(n: usize) -> f64 {
    if n == 1 {
        2.0
    } else {
        2.0 * std::f64::consts::PI
    }
}

/// Radius `R` beyond which `∫_{|x|>R} (1 + |x|^2) w_1` is below `1e-4` of
/// `∫ w_1`, from a power-law (or Gaussian) majorant of the weight.
///
/// Requires `beta > n/2`; the bound is finite only when `beta > n/2 + 1`
/// would make `|x|^2 w_1` integrable, so smaller beta get a larger box.
pub fn recommended_radius(n: usize, beta: f64) -> Result<f64> {
    let nf = n as f64;
    if !(beta > nf / 2.0) {
        return Err(Error::DivergentIntegral {
            beta,
            half_n: nf / 2.0,
        });
    }
    let head = if beta.is_infinite() {
        (2.0 * std::f64::consts::PI).powf(nf / 2.0)
    } else {
        let lg = log_gamma(beta + 1.0 - nf / 2.0)? - log_gamma(beta + 1.0)?;
        (2.0 * std::f64::consts::PI * beta).powf(nf / 2.0) * lg.exp()
    };
    let c = sphere_area(n);
    let bound = |r: f64| -> f64 {
        if beta.is_infinite() {
            2.0 * c * (-r * r / 2.0).exp() * (r.powf(nf) + r.powf(nf - 2.0) + 1.0)
        } else {
            // w_1 <= (2 beta)^(beta+1) r^(-2 beta - 2)
            let k = (beta + 1.0) * (2.0 * beta).ln();
            let lo = if 2.0 * beta + 2.0 > nf {
                (k + (nf - 2.0 * beta - 2.0) * r.ln()).exp() / (2.0 * beta + 2.0 - nf)
            } else {
                f64::INFINITY
            };
            let hi = (k + (nf - 2.0 * beta) * r.ln()).exp() / (2.0 * beta - nf);
            c * (lo + hi)
        }
    };
    let mut r = 2.0;
    while bound(r) > 1e-4 * head {
        r *= 1.05;
        if r > 1e6 {
            return Err(Error::DivergentIntegral {
                beta,
                half_n: nf / 2.0,
            });
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthRoute {
    Limit,
    Representation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthResult {
    pub value: f64,
    pub route: WidthRoute,
    pub quadrature_error_estimate: f64,
    /// `(eps, difference quotient)` pairs; empty for the representation route.
    pub epsilon_schedule: Vec<(f64, f64)>,
    /// Tail contribution added beyond the box (representation route).
    pub tail: f64,
    /// Dual nodes whose maximiser sat on the primal boundary.
    pub boundary_argmax: usize,
}

/// `∫ h_f w_1` over the dual box plus a linear-growth tail beyond it.
///
/// The error estimate is `|Q_h - Q_2h|`, recomputed from the coarsened
/// primal and dual grids, plus the tail itself.
pub fn mean_width_repr(f: &AlphaFn, dual: &GridSpec) -> Result<WidthResult> {
    let beta = f.param().beta();
    let conj = lft::legendre_detailed(f.base(), dual)?;
    let (head, tail) = repr_parts(&conj.values, beta)?;
    let coarse_head = match (f.coarsen(), dual.coarsen()) {
        (Some(fc), Some(dc)) => Some(repr_parts(&support_function(&fc, &dc)?, beta)?.0),
        _ => None,
    };
    let disc = match coarse_head {
        Some(c) => (head - c).abs(),
        None => quadrature(dual, &weighted(&conj.values, beta)?).error,
    };
    if tail.abs() > 0.01 * head.abs() {
        return Err(Error::DomainTooSmall {
            tail,
            integral: head,
        });
    }
    Ok(WidthResult {
        value: head + tail,
        route: WidthRoute::Representation,
        quadrature_error_estimate: disc + tail.abs(),
        epsilon_schedule: Vec::new(),
        tail,
        boundary_argmax: conj.boundary_argmax,
    })
}

fn weighted(h: &GridFn, beta: f64) -> Result<Vec<f64>> {
    let spec = h.spec();
    h.values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if v.is_finite() {
                Ok(v * weight(norm_sq(&spec.point(k)), beta, 1.0))
            } else {
                Err(Error::NonFinite { index: k })
            }
        })
        .collect()
}

fn repr_parts(h: &GridFn, beta: f64) -> Result<(f64, f64)> {
    let spec = h.spec();
    let head = crate::extgrid::trapezoid(spec, &weighted(h, beta)?);
    Ok((head, linear_tail(h, beta)))
}

/// Tail of `∫ h w_1` outside the box, extending `h` linearly from its
/// boundary values and outward slopes.
fn linear_tail(h: &GridFn, beta: f64) -> f64 {
    let spec = h.spec();
    let v = h.values();
    match spec.dim() {
        1 => {
            let a = spec.axis(0);
            let dx = a.spacing();
            let m = a.m;
            let right = (v[m - 1], ((v[m - 1] - v[m - 2]) / dx).max(0.0), a.hi);
            let left = (v[0], ((v[0] - v[1]) / dx).max(0.0), -a.lo);
            [right, left]
                .iter()
                .map(|&(h0, s, r0)| radial_tail(h0, s, r0, beta, 1))
                .sum()
        }
        _ => {
            // equal-area disc with boundary averages of value and outward slope
            let [m0, m1] = spec.shape();
            let (d0, d1) = (spec.spacing(0), spec.spacing(1));
            let mut hsum = 0.0;
            let mut ssum = 0.0;
            let mut count = 0.0;
            for k in 0..spec.len() {
                if !spec.on_boundary(k) {
                    continue;
                }
                let [i0, i1] = spec.multi_index(k);
                let mut s: f64 = 0.0;
                if i0 == 0 {
                    s = s.max((v[k] - v[k + m1]) / d0);
                }
                if i0 == m0 - 1 {
                    s = s.max((v[k] - v[k - m1]) / d0);
                }
                if i1 == 0 {
                    s = s.max((v[k] - v[k + 1]) / d1);
                }
                if i1 == m1 - 1 {
                    s = s.max((v[k] - v[k - 1]) / d1);
                }
                hsum += v[k];
                ssum += s;
                count += 1.0;
            }
            let area = (spec.axis(0).hi - spec.axis(0).lo) * (spec.axis(1).hi - spec.axis(1).lo);
            let rho = (area / std::f64::consts::PI).sqrt();
            radial_tail(hsum / count, ssum / count, rho, beta, 2)
        }
    }
}

/// `c_n ∫_{r0}^inf (h0 + s (r - r0)) w_1(r) r^(n-1) dr` by composite Simpson
/// after substituting `r = r0 / u`.
fn radial_tail(h0: f64, s: f64, r0: f64, beta: f64, n: usize) -> f64 {
    if r0 <= 0.0 {
        return 0.0;
    }
    let g = |u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let r = r0 / u;
        let w = weight(r * r, beta, 1.0);
        if w == 0.0 {
            return 0.0;
        }
        (h0 + s * (r - r0)) * w * r.powi(n as i32 - 1) * r0 / (u * u)
    };
    let steps = 400;
    let du = 1.0 / steps as f64;
    let mut acc = g(0.0) + g(1.0);
    for i in 1..steps {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += c * g(i as f64 * du);
    }
    let c = if n == 1 {
        1.0
    } else {
        2.0 * std::f64::consts::PI
    };
    c * acc * du / 3.0
}

/// The default schedule `{0.02, 0.01, 0.005}`.
pub const DEFAULT_SCHEDULE: [f64; 3] = [0.02, 0.01, 0.005];

/// `w_alpha(f) = lim (∫ G ⋆ eps·f - ∫ G) / eps` by difference quotients on
/// `f`'s grid and one order-1 Richardson step on the last two entries.
///
/// `∫ G` is integrated on the same grid, so box truncation cancels in the
/// difference; the error estimate is the change between the last two
/// Richardson values (or between the last quotient and the extrapolation
/// when only two entries are given).
pub fn mean_width_limit(f: &AlphaFn, schedule: &[f64]) -> Result<WidthResult> {
    if schedule.len() < 2 {
        return Err(Error::InvalidSchedule("needs at least two entries".into()));
    }
    if schedule.iter().any(|&e| !(e > 0.0 && e.is_finite()))
        || schedule.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidSchedule(
            "entries must be positive and strictly decreasing".into(),
        ));
    }
    let param = f.param();
    let spec = f.spec();
    let g = crate::alpha::make_g_alpha(spec, param)?;
    let int_g = g.integral();
    let mut quotients = Vec::with_capacity(schedule.len());
    let mut boundary_argmax = 0;
    for &eps in schedule {
        let (q, b) = perturbed_integral(f, eps, param)?;
        quotients.push((eps, (q - int_g) / eps));
        boundary_argmax = b;
    }
    let richardson = |a: (f64, f64), b: (f64, f64)| (a.0 * b.1 - b.0 * a.1) / (a.0 - b.0);
    let n = quotients.len();
    let value = richardson(quotients[n - 2], quotients[n - 1]);
    let error = if n >= 3 {
        (value - richardson(quotients[n - 3], quotients[n - 2])).abs()
    } else {
        (value - quotients[n - 1].1).abs()
    };
    Ok(WidthResult {
        value,
        route: WidthRoute::Limit,
        quadrature_error_estimate: error,
        epsilon_schedule: quotients,
        tail: 0.0,
        boundary_argmax,
    })
}

/// `∫ G ⋆ (eps · f)` on `f`'s grid, with the boundary-argmax count of the transform.
fn perturbed_integral(f: &AlphaFn, eps: f64, param: AlphaParam) -> Result<(f64, usize)> {
    let spec = f.spec();
    let shifted = GridFn::new(
        spec.clone(),
        Side::Convex,
        (0..spec.len())
            .map(|k| f.base().value(k) + eps * norm_sq(&spec.point(k)) / 2.0)
            .collect(),
    )?;
    let conj = lft::legendre_detailed(&shifted, spec)?;
    let h: Vec<f64> = (0..spec.len())
        .map(|k| norm_sq(&spec.point(k)) / 2.0 - eps * conj.values.value(k))
        .collect();
    let h = GridFn::new(spec.clone(), Side::Convex, h)?;
    let mass = unbase(&h, param).map_err(|_| Error::UndefinedAtEpsilon { epsilon: eps })?;
    Ok((mass.integrate()?, conj.boundary_argmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::{make_g_alpha, Body, FunctionDescriptor};
    use std::f64::consts::PI;

    fn line(r: f64, m: usize) -> GridSpec {
        GridSpec::line(-r, r, m).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert!((integral_g_alpha(1, 2.0, 1.0).unwrap() - PI).abs() < 1e-12);
        let gauss = (2.0 * PI).sqrt();
        assert!((integral_g_alpha(1, f64::INFINITY, 1.0).unwrap() - gauss).abs() < 1e-15);
        // shrink scaling is exact
        for (n, b) in [(1, 2.0), (2, 2.25), (2, f64::INFINITY)] {
            let full = integral_g_alpha(n, b, 1.0).unwrap();
            let half = integral_g_alpha(n, b, 0.5).unwrap();
            assert!((half - full * 2f64.powf(n as f64 / 2.0)).abs() < 1e-12 * half);
        }
        assert!(matches!(
            integral_g_alpha(2, 1.0, 1.0),
            Err(Error::DivergentIntegral { .. })
        ));
    }

    #[test]
    fn closed_form_matches_radial_quadrature() {
        // 2 pi ∫_0^inf r (1 + r^2/4.5)^(-2.25) dr by substitution r = tan-like map
        let beta = 2.25;
        let expected = integral_g_alpha(2, beta, 1.0).unwrap();
        let steps = 200_000;
        let du = 1.0 / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            // midpoint rule on r = u / (1 - u)
            let u = (i as f64 + 0.5) * du;
            let r = u / (1.0 - u);
            let jac = 1.0 / ((1.0 - u) * (1.0 - u));
            acc += r * (1.0 + r * r / (2.0 * beta)).powf(-beta) * jac;
        }
        let quad = 2.0 * PI * acc * du;
        assert!(
            (quad - expected).abs() < 1e-6 * expected,
            "{quad} vs {expected}"
        );
    }

    #[test]
    fn kernel_values() {
        assert_eq!(weight_kernel(&[0.0, 0.0], 3.0, 1).unwrap(), 1.0);
        assert!((weight_kernel(&[2.0, 0.0], 2.0, 1).unwrap() - 0.125).abs() < 1e-15);
        let x = [1.0, 1.0];
        assert!((weight_kernel(&x, f64::INFINITY, 2).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(weight_kernel(&x, 2.0, 3), Err(Error::InvalidOrder(3)));
    }

    #[test]
    fn recommended_radius_is_monotone_in_beta() {
        let r25 = recommended_radius(1, 2.5).unwrap();
        let r4 = recommended_radius(1, 4.0).unwrap();
        let rinf = recommended_radius(1, f64::INFINITY).unwrap();
        assert!(r25 > r4 && r4 > rinf);
        assert!(rinf > 4.0 && rinf < 8.0);
        assert!(recommended_radius(2, 1.0).is_err());
    }

    #[test]
    fn gaussian_width_by_representation() {
        let p = AlphaParam::log_concave();
        let f = make_g_alpha(&line(12.0, 2401), p).unwrap();
        let w = mean_width_repr(&f, &line(8.0, 1601)).unwrap();
        assert!(
            (w.value - 0.5 * (2.0 * PI).sqrt()).abs() < 1e-4,
            "{}",
            w.value
        );
        assert!(w.quadrature_error_estimate < 1e-3);
    }

    #[test]
    fn point_has_zero_width() {
        let s = line(6.0, 601);
        for beta in [2.5, f64::INFINITY] {
            let p = AlphaParam::from_beta(beta).unwrap();
            let pt = FunctionDescriptor::Indicator(Body::origin())
                .to_alpha_fn(&s, p)
                .unwrap();
            assert_eq!(mean_width_repr(&pt, &s).unwrap().value, 0.0);
            assert!(
                mean_width_limit(&pt, &DEFAULT_SCHEDULE)
                    .unwrap()
                    .value
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn interval_width_under_gaussian_weight() {
        let p = AlphaParam::log_concave();
        let s = line(10.0, 4001);
        let k = FunctionDescriptor::Indicator(Body::interval(-1.0, 1.0))
            .to_alpha_fn(&s, p)
            .unwrap();
        let repr = mean_width_repr(&k, &line(8.0, 1601)).unwrap();
        assert!((repr.value - 2.0).abs() < 1e-4, "{}", repr.value);
        let lim = mean_width_limit(&k, &DEFAULT_SCHEDULE).unwrap();
        assert!((lim.value - 2.0).abs() < 1e-2, "{}", lim.value);
    }

    #[test]
    fn g_alpha_width_matches_half_n_integral() {
        for beta in [4.0, 10.0] {
            let p = AlphaParam::from_beta(beta).unwrap();
            let r = recommended_radius(1, beta).unwrap();
            let f = make_g_alpha(&line(1.2 * r, 8001), p).unwrap();
            let w = mean_width_repr(&f, &line(r, 4001)).unwrap();
            let expected = 0.5 * integral_g_alpha(1, beta, 1.0).unwrap();
            assert!(
                (w.value - expected).abs() < 1e-3 * expected,
                "beta {beta}: {}",
                w.value
            );
            let lim = mean_width_limit(&f, &DEFAULT_SCHEDULE).unwrap();
            assert!(
                (lim.value - expected).abs() < 1e-2 * expected,
                "beta {beta}: {}",
                lim.value
            );
        }
    }

    #[test]
    fn schedule_validation() {
        let p = AlphaParam::log_concave();
        let f = make_g_alpha(&line(4.0, 81), p).unwrap();
        assert!(matches!(
            mean_width_limit(&f, &[0.01]),
            Err(Error::InvalidSchedule(_))
        ));
        assert!(matches!(
            mean_width_limit(&f, &[0.01, 0.02]),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn undefined_sum_reports_epsilon() {
        // base far below zero: G ⋆ eps·f leaves the domain for beta = 1
        let p = AlphaParam::from_beta(1.0).unwrap();
        let s = line(2.0, 41);
        let c = GridFn::new(s, Side::Convex, vec![-0.9; 41]).unwrap();
        let f = AlphaFn::from_base(c, p).unwrap();
        let big = [100.0, 50.0];
        assert!(matches!(
            mean_width_limit(&f, &big),
            Err(Error::UndefinedAtEpsilon { epsilon }) if epsilon == 100.0
        ));
    }
}
