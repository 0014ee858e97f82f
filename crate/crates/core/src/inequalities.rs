//! Numerical verifiers for the Borell-Brascamp-Lieb, Urysohn and Poincare
//! type inequalities and for the variation formulas of the Legendre transform.
//!
//! Tolerances are computed from each side's quadrature error estimate (the
//! change under coarsening to every other node) plus `10 eps |rhs|`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::alpha::{convex_combination, AlphaFn};
use crate::error::{Error, Result};
use crate::extgrid::{
    gradient_central, norm_sq, quadrature, support_jump_error, trapezoid, GridFn, GridSpec, Side,
};
use crate::lft;
use crate::meanwidth::{integral_g_alpha, mean_width_repr, recommended_radius, weight};

const ROUNDING: f64 = 10.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub diagnostics: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = lhs - rhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            tolerance,
            pass: slack >= -tolerance,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

/// `[lambda a^k + (1 - lambda) b^k]^(1/k)` and its partial derivatives.
fn power_mean(a: f64, b: f64, lambda: f64, kappa: f64) -> (f64, f64, f64) {
    if kappa == f64::NEG_INFINITY {
        return if a <= b { (a, 1.0, 0.0) } else { (b, 0.0, 1.0) };
    }
    if kappa == 0.0 {
        let m = a.powf(lambda) * b.powf(1.0 - lambda);
        return (m, lambda * m / a, (1.0 - lambda) * m / b);
    }
    let m = (lambda * a.powf(kappa) + (1.0 - lambda) * b.powf(kappa)).powf(1.0 / kappa);
    let da = lambda * (a / m).powf(kappa - 1.0);
    let db = (1.0 - lambda) * (b / m).powf(kappa - 1.0);
    (m, da, db)
}

/// Integral of an alpha-concave function with its quadrature error estimate.
fn integral_with_error(f: &AlphaFn) -> (f64, f64) {
    let q = quadrature(f.spec(), f.mass().values());
    (q.value, q.error)
}

/// `∫ [lambda·f] ⋆ [(1-lambda)·g]` with its change under coarsening plus
/// the support-jump term.
fn combination_integral(lambda: f64, f: &AlphaFn, g: &AlphaFn) -> Result<(f64, f64)> {
    let c = convex_combination(lambda, f, g)?;
    let q = quadrature(c.spec(), c.mass().values());
    let err = match (f.coarsen(), g.coarsen()) {
        (Some(fc), Some(gc)) => {
            (q.value - convex_combination(lambda, &fc, &gc)?.integral()).abs()
                + support_jump_error(c.spec(), c.mass().values())
        }
        _ => q.error,
    };
    Ok((q.value, err))
}

/// `∫ [lambda·f] ⋆ [(1-lambda)·g] >= M_kappa(∫f, ∫g; lambda)`, `kappa = alpha/(1 + n alpha)`.
pub fn check_bbl(f: &AlphaFn, g: &AlphaFn, lambda: f64) -> Result<CheckReport> {
    let n = f.spec().dim();
    let kappa = f.param().kappa(n)?;
    bbl_with_kappa("bbl", f, g, lambda, kappa)
}

/// The Brunn-Minkowski case: for indicators the combination does not depend
/// on alpha, and the volume is `1/n`-concave.
pub fn check_brunn_minkowski(f: &AlphaFn, g: &AlphaFn, lambda: f64) -> Result<CheckReport> {
    let n = f.spec().dim();
    bbl_with_kappa("brunn_minkowski", f, g, lambda, 1.0 / n as f64)
}

fn bbl_with_kappa(
    name: &str,
    f: &AlphaFn,
    g: &AlphaFn,
    lambda: f64,
    kappa: f64,
) -> Result<CheckReport> {
    let (lhs, lhs_err) = combination_integral(lambda, f, g)?;
    let (a, ea) = integral_with_error(f);
    let (b, eb) = integral_with_error(g);
    let (rhs, da, db) = power_mean(a, b, lambda, kappa);
    let tol = lhs_err + da * ea + db * eb + ROUNDING * rhs.abs();
    Ok(CheckReport::new(name, lhs, rhs, tol)
        .with("kappa", kappa)
        .with("lambda", lambda)
        .with("integral_f", a)
        .with("integral_g", b)
        .with("lhs_error", lhs_err)
        .with("grid_spacing", f.spec().max_spacing()))
}

fn urysohn_kappa(n: usize, beta: f64) -> Result<f64> {
    let nf = n as f64;
    if beta <= nf {
        return Err(Error::BetaTooSmall { beta, bound: nf });
    }
    Ok(if beta.is_infinite() {
        0.0
    } else {
        1.0 / (nf - beta)
    })
}

/// `∫G [n/2 + ((∫f/∫G)^kappa - 1)/kappa]`, with `n/2 + log(∫f/∫G)` at kappa = 0.
///
/// `beta = n` (kappa = -inf) is rejected: the bound degenerates to `-inf`
/// or `n/2 ∫G` depending on the ratio and carries no information.
pub fn urysohn_bound(n: usize, beta: f64, integral_f: f64) -> Result<f64> {
    let kappa = urysohn_kappa(n, beta)?;
    if !(integral_f > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "integral of f must be positive, got {integral_f}"
        )));
    }
    let int_g = integral_g_alpha(n, beta, 1.0)?;
    let log_r = (integral_f / int_g).ln();
    let term = if kappa == 0.0 {
        log_r
    } else {
        (kappa * log_r).exp_m1() / kappa
    };
    Ok(int_g * (n as f64 / 2.0 + term))
}

/// The Urysohn right-hand side for `f`, with `∫f` by quadrature.
pub fn urysohn_rhs(f: &AlphaFn) -> Result<f64> {
    urysohn_bound(f.spec().dim(), f.param().beta(), f.integral())
}

/// The dual box used by [`check_urysohn`]: `[-R, R]^n` with the recommended
/// radius and about the primal spacing.
pub fn urysohn_dual(f: &AlphaFn) -> Result<GridSpec> {
    let n = f.spec().dim();
    let r = recommended_radius(n, f.param().beta())?;
    let h = f.spec().max_spacing();
    let cap = if n == 1 { 16_385 } else { 401 };
    let mut m = ((2.0 * r / h).ceil() as usize).clamp(65, cap);
    if m % 2 == 0 {
        m += 1;
    }
    GridSpec::cube(n, -r, r, m)
}

/// `w_alpha(f) >= urysohn_rhs(f)`.
pub fn check_urysohn(f: &AlphaFn) -> Result<CheckReport> {
    check_urysohn_with_dual(f, &urysohn_dual(f)?)
}

pub fn check_urysohn_with_dual(f: &AlphaFn, dual: &GridSpec) -> Result<CheckReport> {
    let n = f.spec().dim();
    let beta = f.param().beta();
    let kappa = urysohn_kappa(n, beta)?;
    let width = mean_width_repr(f, dual)?;
    let (int_f, err_f) = integral_with_error(f);
    let rhs = urysohn_bound(n, beta, int_f)?;
    let int_g = integral_g_alpha(n, beta, 1.0)?;
    // d rhs / d ∫f = (∫f / ∫G)^(kappa - 1)
    let drhs = (int_f / int_g).powf(kappa - 1.0);
    let tol = width.quadrature_error_estimate + drhs * err_f + ROUNDING * rhs.abs();
    Ok(CheckReport::new("urysohn", width.value, rhs, tol)
        .with("kappa", kappa)
        .with("integral_f", int_f)
        .with("integral_g", int_g)
        .with("width_error", width.quadrature_error_estimate)
        .with("width_tail", width.tail)
        .with("boundary_argmax", width.boundary_argmax as f64)
        .with("dual_radius", dual.axis(0).hi))
}

fn require_finite(psi: &GridFn) -> Result<()> {
    match psi.values().iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// The three weighted integrals `∫|∇psi|^2 w1`, `∫psi w1`, `∫psi^2 w2`.
fn poincare_integrals(psi: &GridFn, beta: f64) -> Result<[f64; 3]> {
    let spec = psi.spec();
    let grad = gradient_central(psi)?.norm_squared();
    let mut a = Vec::with_capacity(spec.len());
    let mut b = Vec::with_capacity(spec.len());
    let mut c = Vec::with_capacity(spec.len());
    for (k, &p) in psi.values().iter().enumerate() {
        let r2 = norm_sq(&spec.point(k));
        let (w1, w2) = (weight(r2, beta, 1.0), weight(r2, beta, 2.0));
        a.push(grad[k] * w1);
        b.push(p * w1);
        c.push(p * p * w2);
    }
    Ok([
        trapezoid(spec, &a),
        trapezoid(spec, &b),
        trapezoid(spec, &c),
    ])
}

fn poincare_sides(psi: &GridFn, beta: f64, kappa: f64, int_g: f64) -> Result<(f64, f64)> {
    let [grad, first, second] = poincare_integrals(psi, beta)?;
    let rhs = (kappa - 1.0) / int_g * first * first + (beta + 1.0) / beta * second;
    Ok((grad, rhs))
}

/// Largest order-1 weight on the boundary of the box, a truncation indicator.
fn boundary_weight(spec: &GridSpec, beta: f64) -> f64 {
    (0..spec.len())
        .filter(|&k| spec.on_boundary(k))
        .map(|k| weight(norm_sq(&spec.point(k)), beta, 1.0))
        .fold(0.0, f64::max)
}

/// The generalized Poincare inequality for `beta > n`:
/// `∫|∇psi|^2 w1 >= (kappa - 1)/∫G (∫psi w1)^2 + (beta + 1)/beta ∫psi^2 w2`.
///
/// `psi` is any finite sample (stored on the convex side); integrals run
/// over its box, so it should be polynomially bounded.
pub fn check_poincare(psi: &GridFn, beta: f64) -> Result<CheckReport> {
    let spec = psi.spec();
    let n = spec.dim();
    if !(beta > n as f64) {
        return Err(Error::BetaTooSmall {
            beta,
            bound: n as f64,
        });
    }
    require_finite(psi)?;
    let kappa = if beta.is_infinite() {
        0.0
    } else {
        1.0 / (n as f64 - beta)
    };
    let int_g = integral_g_alpha(n, beta, 1.0)?;
    let (lhs, rhs) = poincare_sides(psi, beta, kappa, int_g)?;
    let (le, re) = match psi.coarsen() {
        Some(c) => {
            let (l, r) = poincare_sides(&c, beta, kappa, int_g)?;
            ((lhs - l).abs(), (rhs - r).abs())
        }
        None => (0.0, 0.0),
    };
    let tol = le + re + ROUNDING * rhs.abs();
    let report = CheckReport::new("poincare", lhs, rhs, tol);
    let normalized = report.slack / int_g;
    Ok(report
        .with("kappa", kappa)
        .with("beta", beta)
        .with("integral_g", int_g)
        .with("normalized_slack", normalized)
        .with("lhs_error", le)
        .with("rhs_error", re)
        .with("boundary_weight", boundary_weight(spec, beta)))
}

fn gaussian_sides(psi: &GridFn) -> Result<(f64, f64)> {
    let spec = psi.spec();
    let gauss: Vec<f64> = (0..spec.len())
        .map(|k| (-norm_sq(&spec.point(k)) / 2.0).exp())
        .collect();
    let z = trapezoid(spec, &gauss);
    let grad = gradient_central(psi)?.norm_squared();
    let v = psi.values();
    let moment = |f: &dyn Fn(usize) -> f64| -> f64 {
        trapezoid(
            spec,
            &(0..spec.len()).map(|k| f(k) * gauss[k]).collect::<Vec<_>>(),
        ) / z
    };
    let lhs = moment(&|k| grad[k]);
    let mean = moment(&|k| v[k]);
    let second = moment(&|k| v[k] * v[k]);
    Ok((lhs, second - mean * mean))
}

/// `∫|∇psi|^2 dγ >= ∫psi^2 dγ - (∫psi dγ)^2` for the standard Gaussian measure,
/// normalized by its quadrature mass on the box.
pub fn check_gaussian_poincare(psi: &GridFn) -> Result<CheckReport> {
    require_finite(psi)?;
    let (lhs, rhs) = gaussian_sides(psi)?;
    let (le, re) = match psi.coarsen() {
        Some(c) => {
            let (l, r) = gaussian_sides(&c)?;
            ((lhs - l).abs(), (rhs - r).abs())
        }
        None => (0.0, 0.0),
    };
    let tol = le + re + ROUNDING * rhs.abs();
    Ok(CheckReport::new("gaussian_poincare", lhs, rhs, tol)
        .with("lhs_error", le)
        .with("rhs_error", re)
        .with(
            "boundary_weight",
            boundary_weight(psi.spec(), f64::INFINITY),
        ))
}

/// Allowed finite-difference error for [`check_variation_formulas`].
pub const VARIATION_TOLERANCE: f64 = 1e-4;

/// Conjugate values of `phi` at the nodes `eval` of its own grid, refined by
/// the local quadratic model around each discrete maximiser:
/// `<x_i, y> - phi_i + (y - g)^T H^{-1} (y - g) / 2`.
fn refined_conjugate(phi: &GridFn, eval: &[usize]) -> Result<Vec<f64>> {
    let spec = phi.spec();
    let conj = lft::legendre_detailed(phi, spec)?;
    let v = phi.values();
    let [m0, m1] = spec.shape();
    let dim = spec.dim();
    let mut out = Vec::with_capacity(eval.len());
    for &k in eval {
        let y = spec.point(k);
        let i = conj.argmax[k];
        let x = spec.point(i);
        let base = x[0] * y[0] + x[1] * y[1] - v[i];
        if spec.on_boundary(i) {
            out.push(base);
            continue;
        }
        let stride = [if dim == 1 { 1 } else { m1 }, 1];
        let mut g = [0.0; 2];
        let mut hess = [[0.0; 2]; 2];
        for a in 0..dim {
            let h = spec.spacing(a);
            let (p, q) = (v[i + stride[a]], v[i - stride[a]]);
            g[a] = (p - q) / (2.0 * h);
            hess[a][a] = (p - 2.0 * v[i] + q) / (h * h);
        }
        let r = [y[0] - g[0], y[1] - g[1]];
        let correction = if dim == 1 {
            r[0] * r[0] / hess[0][0]
        } else {
            let (h0, h1) = (spec.spacing(0), spec.spacing(1));
            let _ = m0;
            let mixed =
                (v[i + m1 + 1] - v[i + m1 - 1] - v[i - m1 + 1] + v[i - m1 - 1]) / (4.0 * h0 * h1);
            hess[0][1] = mixed;
            hess[1][0] = mixed;
            let det = hess[0][0] * hess[1][1] - mixed * mixed;
            (hess[1][1] * r[0] * r[0] - 2.0 * mixed * r[0] * r[1] + hess[0][0] * r[1] * r[1]) / det
        };
        out.push(base + 0.5 * correction);
    }
    Ok(out)
}

/// Maximum first- and second-variation errors at step `t`.
fn variation_errors(
    phi0: &GridFn,
    psi: &GridFn,
    eval: &[usize],
    target_first: &[f64],
    target_second: &[f64],
    t: f64,
) -> Result<Option<(f64, f64)>> {
    let spec = phi0.spec();
    let shifted = |s: f64| -> Result<GridFn> {
        let vals = phi0
            .values()
            .iter()
            .zip(psi.values())
            .map(|(a, b)| a + s * b)
            .collect();
        GridFn::new(spec.clone(), Side::Convex, vals)
    };
    let plus = shifted(t)?;
    let minus = shifted(-t)?;
    if !lft::is_convex_along_lines(&plus, 0.0) || !lft::is_convex_along_lines(&minus, 0.0) {
        return Ok(None);
    }
    let cp = refined_conjugate(&plus, eval)?;
    let cm = refined_conjugate(&minus, eval)?;
    let c0 = refined_conjugate(phi0, eval)?;
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    for j in 0..eval.len() {
        let first = (cp[j] - cm[j]) / (2.0 * t);
        let second = (cp[j] - 2.0 * c0[j] + cm[j]) / (t * t);
        e1 = e1.max((first - target_first[j]).abs());
        e2 = e2.max((second - target_second[j]).abs());
    }
    Ok(Some((e1, e2)))
}

/// Central differences in `t` of `(phi0 + t psi)^*` against the first and
/// second variation formulas `-psi` and `|∇psi|^2`, with `phi0 = |x|^2/2`.
///
/// Runs at `t_step` and `t_step/2`; the step is halved while either
/// `phi0 ± t psi` fails to be convex. The report's lhs is the allowed error
/// and its rhs the worst error seen; the halving ratios are diagnostics.
pub fn check_variation_formulas(phi0: &GridFn, psi: &GridFn, t_step: f64) -> Result<CheckReport> {
    phi0.require_side(Side::Convex)?;
    let spec = phi0.spec();
    if psi.spec() != spec {
        return Err(Error::SpecMismatch);
    }
    require_finite(psi)?;
    if !(t_step > 0.0 && t_step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t step must be positive, got {t_step}"
        )));
    }
    for k in 0..spec.len() {
        let expected = norm_sq(&spec.point(k)) / 2.0;
        if (phi0.value(k) - expected).abs() > 1e-12 * expected.max(1.0) {
            return Err(Error::InvalidParameter(
                "phi0 must be |x|^2/2 on the grid".into(),
            ));
        }
    }
    let half = 0.5 * spec.inner_radius();
    let eval: Vec<usize> = (0..spec.len())
        .filter(|&k| !spec.on_boundary(k) && norm_sq(&spec.point(k)).sqrt() <= half)
        .collect();
    let grad = gradient_central(psi)?.norm_squared();
    let target_first: Vec<f64> = eval.iter().map(|&k| -psi.value(k)).collect();
    let target_second: Vec<f64> = eval.iter().map(|&k| grad[k]).collect();

    let mut t = t_step;
    let mut coarse = None;
    for _ in 0..30 {
        if let Some(e) = variation_errors(phi0, psi, &eval, &target_first, &target_second, t)? {
            coarse = Some(e);
            break;
        }
        t /= 2.0;
    }
    let (e1, e2) = coarse.ok_or_else(|| {
        Error::InvalidParameter("phi0 + t psi is not convex for any tried t".into())
    })?;
    let (f1, f2) = variation_errors(phi0, psi, &eval, &target_first, &target_second, t / 2.0)?
        .expect("convexity is inherited from the larger step");
    let worst = e1.max(e2).max(f1).max(f2);
    Ok(
        CheckReport::new("variation", VARIATION_TOLERANCE, worst, 0.0)
            .with("t_step", t)
            .with("first_error", e1)
            .with("second_error", e2)
            .with("first_error_half", f1)
            .with("second_error_half", f2)
            .with("first_ratio", e1 / f1)
            .with("second_ratio", e2 / f2)
            .with("points", eval.len() as f64),
    )
}
