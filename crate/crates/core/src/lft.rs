//! Discrete Legendre–Fenchel transform, convex envelopes, and inf-/sup-convolution.
//!
//! The transform takes the supremum over sampled points only, so it is exactly
//! order reversing. Each 1D pass builds the lower convex hull of the finite
//! samples and walks it against the sorted dual nodes, which is linear in the
//! number of nodes. A 2D transform is two nested 1D passes:
//! `sup_{x0,x1} = sup_{x0} sup_{x1}`.

use crate::error::{Error, Result};
use crate::extgrid::{Axis, GridFn, GridSpec, Side};

/// A conjugate together with the number of dual nodes whose maximiser sits on
/// the boundary of the primal box, which signals truncation of the sup.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugate {
    pub values: GridFn,
    pub boundary_argmax: usize,
    /// Flat primal index of the maximiser for each dual node.
    pub argmax: Vec<usize>,
}

/// `phi*(y) = max_x (<x, y> - phi(x))` over primal nodes, for each node `y` of `dual`.
pub fn legendre(phi: &GridFn, dual: &GridSpec) -> Result<GridFn> {
    Ok(legendre_detailed(phi, dual)?.values)
}

pub fn legendre_detailed(phi: &GridFn, dual: &GridSpec) -> Result<Conjugate> {
    phi.require_side(Side::Convex)?;
    let primal = phi.spec();
    if primal.dim() != dual.dim() {
        return Err(Error::SpecMismatch);
    }
    let vals = phi.values();
    match primal.dim() {
        1 => {
            let mut out = vec![0.0; dual.len()];
            let mut arg = vec![0; dual.len()];
            conjugate_1d(primal.axis(0), vals, dual.axis(0), &mut out, &mut arg);
            let boundary = arg.iter().filter(|&&a| primal.on_boundary(a)).count();
            Ok(Conjugate {
                values: GridFn::new(dual.clone(), Side::Convex, out)?,
                boundary_argmax: boundary,
                argmax: arg,
            })
        }
        _ => {
            let [m0, m1] = primal.shape();
            let [d0, d1] = dual.shape();
            // inner pass along axis 1: psi(i0, j1) = phi(i0, .)^*(y1_j1)
            let mut inner = vec![0.0; m0 * d1];
            let mut inner_arg = vec![0usize; m0 * d1];
            for i0 in 0..m0 {
                conjugate_1d(
                    primal.axis(1),
                    &vals[i0 * m1..(i0 + 1) * m1],
                    dual.axis(1),
                    &mut inner[i0 * d1..(i0 + 1) * d1],
                    &mut inner_arg[i0 * d1..(i0 + 1) * d1],
                );
            }
            // outer pass along axis 0 of -psi(., j1)
            let mut out = vec![0.0; d0 * d1];
            let mut arg = vec![0usize; d0 * d1];
            let mut col = vec![0.0; m0];
            let mut col_out = vec![0.0; d0];
            let mut col_arg = vec![0usize; d0];
            for j1 in 0..d1 {
                for i0 in 0..m0 {
                    col[i0] = -inner[i0 * d1 + j1];
                }
                conjugate_1d(
                    primal.axis(0),
                    &col,
                    dual.axis(0),
                    &mut col_out,
                    &mut col_arg,
                );
                for j0 in 0..d0 {
                    let a0 = col_arg[j0];
                    out[j0 * d1 + j1] = col_out[j0];
                    arg[j0 * d1 + j1] = primal.index(a0, inner_arg[a0 * d1 + j1]);
                }
            }
            let boundary = arg.iter().filter(|&&a| primal.on_boundary(a)).count();
            Ok(Conjugate {
                values: GridFn::new(dual.clone(), Side::Convex, out)?,
                boundary_argmax: boundary,
                argmax: arg,
            })
        }
    }
}

/// One-dimensional discrete conjugate. Rows that are +inf everywhere produce
/// -inf (the supremum over an empty set).
fn conjugate_1d(primal: &Axis, vals: &[f64], dual: &Axis, out: &mut [f64], arg: &mut [usize]) {
    let hull = lower_hull(primal, vals);
    if hull.is_empty() {
        out.fill(f64::NEG_INFINITY);
        arg.fill(0);
        return;
    }
    let xs: Vec<f64> = hull.iter().map(|&i| primal.coord(i)).collect();
    let slopes: Vec<f64> = hull
        .windows(2)
        .zip(xs.windows(2))
        .map(|(i, x)| (vals[i[1]] - vals[i[0]]) / (x[1] - x[0]))
        .collect();
    // optimal vertex j: slopes[j-1] <= y <= slopes[j]; ties go to the smaller index
    let mut j = 0;
    for (k, o) in out.iter_mut().enumerate() {
        let y = dual.coord(k);
        while j < slopes.len() && slopes[j] < y {
            j += 1;
        }
        *o = xs[j] * y - vals[hull[j]];
        arg[k] = hull[j];
    }
}

/// Indices of the vertices of the lower convex hull of the finite samples,
/// left to right. Collinear interior points are dropped.
fn lower_hull(axis: &Axis, vals: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        let x = axis.coord(i);
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let (xa, xb) = (axis.coord(a), axis.coord(b));
            // drop b unless it lies strictly below segment a..i
            let cross = (xb - xa) * (v - vals[a]) - (vals[b] - vals[a]) * (x - xa);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Default dual box: per axis, the largest finite-difference slope of `phi`,
/// padded by 10%, at the primal resolution. Falls back to radius 1 for
/// functions that are flat on their domain.
pub fn default_dual(phi: &GridFn) -> GridSpec {
    let spec = phi.spec();
    let [m0, m1] = spec.shape();
    let vals = phi.values();
    let axes = (0..spec.dim())
        .map(|axis| {
            let h = spec.spacing(axis);
            let mut slope: f64 = 0.0;
            for k in 0..spec.len() {
                let idx = spec.multi_index(k);
                let m = if axis == 0 { m0 } else { m1 };
                if idx[axis] + 1 >= m {
                    continue;
                }
                let next = if axis == 0 { k + m1 } else { k + 1 };
                if vals[k].is_finite() && vals[next].is_finite() {
                    slope = slope.max(((vals[next] - vals[k]) / h).abs());
                }
            }
            let r = if slope > 0.0 { 1.1 * slope } else { 1.0 };
            Axis {
                lo: -r,
                hi: r,
                m: spec.axis(axis).m,
            }
        })
        .collect();
    GridSpec::new(axes).expect("positive radius and primal point count")
}

/// Largest convex minorant of the samples (the double conjugate on the
/// primal grid). Exact lower hull in 1D; a double discrete transform in 2D.
pub fn convex_envelope(phi: &GridFn) -> Result<GridFn> {
    phi.require_side(Side::Convex)?;
    let spec = phi.spec();
    let vals = phi.values();
    if spec.dim() == 1 {
        let axis = spec.axis(0);
        let hull = lower_hull(axis, vals);
        let mut out = vec![f64::INFINITY; vals.len()];
        for w in hull.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (xa, xb) = (axis.coord(a), axis.coord(b));
            for (i, o) in out.iter_mut().enumerate().take(b).skip(a) {
                let t = (axis.coord(i) - xa) / (xb - xa);
                *o = if i == a {
                    vals[a]
                } else {
                    vals[a] + t * (vals[b] - vals[a])
                };
            }
        }
        if let Some(&last) = hull.last() {
            out[last] = vals[last];
        }
        return GridFn::new(spec.clone(), Side::Convex, out);
    }
    let base_dual = default_dual(phi);
    let dual = GridSpec::new(
        base_dual
            .axes()
            .iter()
            .map(|a| Axis {
                m: 2 * a.m - 1,
                ..*a
            })
            .collect(),
    )?;
    let star = legendre(phi, &dual)?;
    let mut out = legendre(&star, spec)?.into_values();
    let finite: Vec<[f64; 2]> = (0..spec.len())
        .filter(|&k| vals[k].is_finite())
        .map(|k| spec.point(k))
        .collect();
    let poly = convex_hull_2d(finite);
    for (k, o) in out.iter_mut().enumerate() {
        if !vals[k].is_finite() && !inside_polygon(&poly, &spec.point(k), 1e-9 * spec.max_spacing())
        {
            *o = f64::INFINITY;
        } else {
            *o = o.min(vals[k]);
        }
    }
    GridFn::new(spec.clone(), Side::Convex, out)
}

fn convex_hull_2d(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2
                && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

fn inside_polygon(poly: &[[f64; 2]], p: &[f64; 2], tol: f64) -> bool {
    match poly.len() {
        0 => false,
        1 => (poly[0][0] - p[0]).abs() <= tol && (poly[0][1] - p[1]).abs() <= tol,
        _ => {
            let n = poly.len();
            (0..n).all(|i| {
                let a = poly[i];
                let b = poly[(i + 1) % n];
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                cross >= -tol * len
            })
        }
    }
}

/// Whether a convex-side sample is convex along every grid line: finite
/// values form one contiguous run per line and second differences are
/// at least `-tol * (1 + |local values|)`.
pub fn is_convex_along_lines(phi: &GridFn, tol: f64) -> bool {
    first_convexity_violation(phi, tol).is_none()
}

/// Flat index of the first node where convexity along a grid line fails.
pub(crate) fn first_convexity_violation(phi: &GridFn, tol: f64) -> Option<usize> {
    let spec = phi.spec();
    let [m0, m1] = spec.shape();
    let vals = phi.values();
    let lines: Vec<(usize, usize, usize)> = if spec.dim() == 1 {
        vec![(0, 1, m0)]
    } else {
        let mut l: Vec<_> = (0..m0).map(|i0| (i0 * m1, 1, m1)).collect();
        l.extend((0..m1).map(|i1| (i1, m1, m0)));
        l
    };
    for (start, stride, len) in lines {
        let at = |i: usize| vals[start + i * stride];
        let first = (0..len).find(|&i| at(i).is_finite());
        let Some(first) = first else { continue };
        let last = (0..len).rev().find(|&i| at(i).is_finite()).unwrap();
        if let Some(i) = (first..=last).find(|&i| !at(i).is_finite()) {
            return Some(start + i * stride);
        }
        for i in first + 1..last {
            let (a, b, c) = (at(i - 1), at(i), at(i + 1));
            if a - 2.0 * b + c < -tol * (1.0 + a.abs().max(b.abs()).max(c.abs())) {
                return Some(start + i * stride);
            }
        }
    }
    None
}

fn check_pair(a: &GridFn, b: &GridFn, side: Side) -> Result<[usize; 2]> {
    a.require_side(side)?;
    b.require_side(side)?;
    if a.spec() != b.spec() {
        return Err(Error::SpecMismatch);
    }
    a.spec().origin()
}

/// Visits every pair of selected nodes `(i, j)` whose sum `x_i + x_j` is a node `k`.
fn for_each_sum(
    spec: &GridSpec,
    origin: [usize; 2],
    left: &[usize],
    right: &[usize],
    mut visit: impl FnMut(usize, usize, usize),
) {
    let [m0, m1] = spec.shape();
    let right_idx: Vec<[usize; 2]> = right.iter().map(|&j| spec.multi_index(j)).collect();
    for &i in left {
        let ii = spec.multi_index(i);
        for (&j, jj) in right.iter().zip(&right_idx) {
            let s0 = ii[0] + jj[0];
            let s1 = ii[1] + jj[1];
            if s0 < origin[0] || s1 < origin[1] {
                continue;
            }
            let (k0, k1) = (s0 - origin[0], s1 - origin[1]);
            if k0 < m0 && k1 < m1 {
                visit(k0 * m1 + k1, i, j);
            }
        }
    }
}

/// `(phi □ psi)(x) = min over node pairs y + z = x of phi(y) + psi(z)`.
///
/// Both inputs must share a grid containing the origin. Convex 1D inputs go
/// through the slope-merging route (the Minkowski sum of epigraphs, dual to
/// adding conjugates), which is linear time and agrees with the direct scan.
/// Everything else uses the direct scan, since merging would convexify.
pub fn inf_convolve(phi: &GridFn, psi: &GridFn) -> Result<GridFn> {
    let origin = check_pair(phi, psi, Side::Convex)?;
    if phi.spec().dim() == 1
        && is_convex_along_lines(phi, 1e-12)
        && is_convex_along_lines(psi, 1e-12)
    {
        merge_convex_1d(phi, psi, origin[0])
    } else {
        inf_convolve_direct(phi, psi)
    }
}

/// Direct O(N^2) scan over finite node pairs.
pub fn inf_convolve_direct(phi: &GridFn, psi: &GridFn) -> Result<GridFn> {
    let origin = check_pair(phi, psi, Side::Convex)?;
    let spec = phi.spec();
    let (a, b) = (phi.values(), psi.values());
    let fa: Vec<usize> = (0..a.len()).filter(|&i| a[i].is_finite()).collect();
    let fb: Vec<usize> = (0..b.len()).filter(|&j| b[j].is_finite()).collect();
    let mut out = vec![f64::INFINITY; spec.len()];
    for_each_sum(spec, origin, &fa, &fb, |k, i, j| {
        let v = a[i] + b[j];
        if v < out[k] {
            out[k] = v;
        }
    });
    GridFn::new(spec.clone(), Side::Convex, out)
}

fn merge_convex_1d(phi: &GridFn, psi: &GridFn, origin: usize) -> Result<GridFn> {
    let spec = phi.spec();
    let m = spec.len();
    let (a, b) = (phi.values(), psi.values());
    let range = |v: &[f64]| {
        let lo = v.iter().position(|x| x.is_finite()).unwrap();
        let hi = v.iter().rposition(|x| x.is_finite()).unwrap();
        (lo, hi)
    };
    let (alo, ahi) = range(a);
    let (blo, bhi) = range(b);
    let mut out = vec![f64::INFINITY; m];
    let (mut i, mut j) = (alo, blo);
    loop {
        let s = i + j;
        if s >= origin && s - origin < m {
            // the merge path gives the optimal split; ties along the
            // anti-diagonal are resolved by comparing the neighbours
            let mut v = a[i] + b[j];
            if i < ahi && j > blo {
                v = v.min(a[i + 1] + b[j - 1]);
            }
            if i > alo && j < bhi {
                v = v.min(a[i - 1] + b[j + 1]);
            }
            out[s - origin] = v;
        }
        match (i < ahi, j < bhi) {
            (false, false) => break,
            (true, false) => i += 1,
            (false, true) => j += 1,
            (true, true) => {
                if a[i + 1] - a[i] <= b[j + 1] - b[j] {
                    i += 1
                } else {
                    j += 1
                }
            }
        }
    }
    GridFn::new(spec.clone(), Side::Convex, out)
}

/// The conjugate route `(phi* + psi*)*` through `dual`. Convexifies its
/// inputs and carries the O(h) bias of the sampled dual.
pub fn inf_convolve_dual(phi: &GridFn, psi: &GridFn, dual: &GridSpec) -> Result<GridFn> {
    check_pair(phi, psi, Side::Convex)?;
    let a = legendre(phi, dual)?;
    let b = legendre(psi, dual)?;
    let sum: Vec<f64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x + y)
        .collect();
    legendre(&GridFn::new(dual.clone(), Side::Convex, sum)?, phi.spec())
}

/// `(f ⋆ g)(x) = max over node pairs y + z = x of f(y) g(z)`.
pub fn sup_convolve(f: &GridFn, g: &GridFn) -> Result<GridFn> {
    let origin = check_pair(f, g, Side::Mass)?;
    let spec = f.spec();
    let (a, b) = (f.values(), g.values());
    let pa: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
    let pb: Vec<usize> = (0..b.len()).filter(|&j| b[j] > 0.0).collect();
    let mut out = vec![0.0; spec.len()];
    for_each_sum(spec, origin, &pa, &pb, |k, i, j| {
        let v = a[i] * b[j];
        if v > out[k] {
            out[k] = v;
        }
    });
    GridFn::new(spec.clone(), Side::Mass, out)
}
