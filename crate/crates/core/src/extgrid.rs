//! Uniform grids on boxes in R^1 and R^2, extended-real sampled functions,
//! trapezoidal quadrature and finite-difference gradients.
//!
//! Convex-side functions take values in (-inf, +inf]; `f64::INFINITY` is the
//! +inf element and behaves absorbingly under `+` and `max`. Mass-side
//! functions are finite and non-negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the ambient space. One-dimensional grids leave the second
/// coordinate at zero, so norms and inner products need no dimension switch.
pub type Point = [f64; 2];

/// One axis of a grid: `m` equispaced nodes from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub m: usize,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.m - 1) as f64
    }

    /// Coordinate of node `k`; always computed as `lo + k*h`.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.spacing()
    }

    /// Index `o` with `coord(o) == 0`, if the origin is a node.
    pub fn origin_index(&self) -> Option<usize> {
        let t = -self.lo / self.spacing();
        let r = t.round();
        if r >= 0.0 && r < self.m as f64 && (t - r).abs() < 1e-9 {
            Some(r as usize)
        } else {
            None
        }
    }
}

/// Axis-aligned box in R^d, d in {1, 2}, with uniform resolution per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                axes.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo < a.hi) {
                return Err(Error::InvalidGrid(format!(
                    "axis {i}: need finite lo < hi, got [{}, {}]",
                    a.lo, a.hi
                )));
            }
            if a.m < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {i}: need at least 3 points, got {}",
                    a.m
                )));
            }
        }
        Ok(Self { axes })
    }

    pub fn line(lo: f64, hi: f64, m: usize) -> Result<Self> {
        Self::new(vec![Axis { lo, hi, m }])
    }

    /// The cube `[lo, hi]^dim` with `m` points per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, m: usize) -> Result<Self> {
        Self::new(vec![Axis { lo, hi, m }; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.m).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node counts per axis, padded with 1 for 1D grids.
    pub fn shape(&self) -> [usize; 2] {
        [self.axes[0].m, self.axes.get(1).map_or(1, |a| a.m)]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.axes[axis].spacing()
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Flat index of a multi-index; the last axis varies fastest.
    #[inline]
    pub fn index(&self, i0: usize, i1: usize) -> usize {
        i0 * self.shape()[1] + i1
    }

    #[inline]
    pub fn multi_index(&self, k: usize) -> [usize; 2] {
        let m1 = self.shape()[1];
        [k / m1, k % m1]
    }

    #[inline]
    pub fn point(&self, k: usize) -> Point {
        let [i0, i1] = self.multi_index(k);
        let mut p = [self.axes[0].coord(i0), 0.0];
        if let Some(a) = self.axes.get(1) {
            p[1] = a.coord(i1);
        }
        p
    }

    /// Per-axis origin node indices; `OriginNotOnGrid` if the origin is not a node.
    pub fn origin(&self) -> Result<[usize; 2]> {
        let mut o = [0usize; 2];
        for (i, a) in self.axes.iter().enumerate() {
            o[i] = a.origin_index().ok_or(Error::OriginNotOnGrid { axis: i })?;
        }
        Ok(o)
    }

    /// The grid made of every other node. Requires odd point counts.
    pub fn coarsen(&self) -> Option<GridSpec> {
        if self.axes.iter().any(|a| a.m % 2 == 0 || a.m < 5) {
            return None;
        }
        let axes = self
            .axes
            .iter()
            .map(|a| Axis {
                lo: a.lo,
                hi: a.hi,
                m: a.m.div_ceil(2),
            })
            .collect();
        Some(GridSpec { axes })
    }

    /// Largest radius `r` such that `[-r, r]^d` fits inside the box.
    pub fn inner_radius(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.lo.abs().min(a.hi.abs()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether node `k` lies on the boundary of the box.
    pub fn on_boundary(&self, k: usize) -> bool {
        let idx = self.multi_index(k);
        self.axes
            .iter()
            .enumerate()
            .any(|(i, a)| idx[i] == 0 || idx[i] == a.m - 1)
    }
}

/// Which class a sampled function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Values in (-inf, +inf]; at least one finite.
    Convex,
    /// Values finite and >= 0; not identically zero.
    Mass,
}

/// A function sampled on every node of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    spec: GridSpec,
    side: Side,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(spec: GridSpec, side: Side, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::LengthMismatch {
                expected: spec.len(),
                found: values.len(),
            });
        }
        match side {
            Side::Mass => {
                if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidMass {
                        index,
                        value: values[index],
                    });
                }
                if values.iter().all(|&v| v == 0.0) {
                    return Err(Error::ZeroMass);
                }
            }
            Side::Convex => {
                if let Some(index) = values
                    .iter()
                    .position(|v| v.is_nan() || *v == f64::NEG_INFINITY)
                {
                    return Err(Error::InvalidConvexValue { index });
                }
                if values.iter().all(|v| v.is_infinite()) {
                    return Err(Error::AllInfinite);
                }
            }
        }
        Ok(Self { spec, side, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(spec: GridSpec, side: Side, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = (0..spec.len()).map(|k| f(&spec.point(k))).collect();
        Self::new(spec, side, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn require_side(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(Error::WrongSide {
                expected: side,
                found: self.side,
            });
        }
        Ok(())
    }

    /// Every other node along each axis.
    pub fn coarsen(&self) -> Option<GridFn> {
        let coarse = self.spec.coarsen()?;
        let [c0, c1] = coarse.shape();
        let stride1 = if self.spec.dim() == 2 { 2 } else { 1 };
        let mut values = Vec::with_capacity(coarse.len());
        for i0 in 0..c0 {
            for i1 in 0..c1 {
                values.push(self.values[self.spec.index(2 * i0, stride1 * i1)]);
            }
        }
        GridFn::new(coarse, self.side, values).ok()
    }

    /// Trapezoidal integral of a mass-side function.
    pub fn integrate(&self) -> Result<f64> {
        self.require_side(Side::Mass)?;
        Ok(trapezoid(&self.spec, &self.values))
    }

    /// Trapezoidal integral with an error estimate; see [`quadrature`].
    pub fn integrate_with_error(&self) -> Result<Quadrature> {
        self.require_side(Side::Mass)?;
        Ok(quadrature(&self.spec, &self.values))
    }
}

/// Tensor-product trapezoidal rule over the whole box.
pub fn trapezoid(spec: &GridSpec, values: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), spec.len());
    let [m0, m1] = spec.shape();
    let w = |i: usize, m: usize| if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
    let mut total = 0.0;
    if spec.dim() == 1 {
        for (i, v) in values.iter().enumerate() {
            total += w(i, m0) * v;
        }
    } else {
        for i0 in 0..m0 {
            let row = &values[i0 * m1..(i0 + 1) * m1];
            let mut s = 0.0;
            for (i1, v) in row.iter().enumerate() {
                s += w(i1, m1) * v;
            }
            total += w(i0, m0) * s;
        }
    }
    total * spec.cell_volume()
}

/// A quadrature value and a non-negative estimate of its discretisation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Trapezoid on the grid, with error `|T_h - T_2h|` from the coarsened grid
/// plus [`support_jump_error`].
///
/// For even point counts the coarsening term falls back to the gap between
/// the trapezoid and rectangle rules, which is O(h) and conservative.
pub fn quadrature(spec: &GridSpec, values: &[f64]) -> Quadrature {
    let value = trapezoid(spec, values);
    let error = match spec.coarsen() {
        Some(coarse) => {
            let [c0, c1] = coarse.shape();
            let stride1 = if spec.dim() == 2 { 2 } else { 1 };
            let mut cv = Vec::with_capacity(coarse.len());
            for i0 in 0..c0 {
                for i1 in 0..c1 {
                    cv.push(values[spec.index(2 * i0, stride1 * i1)]);
                }
            }
            (value - trapezoid(&coarse, &cv)).abs()
        }
        None => {
            let rect: f64 = values.iter().sum::<f64>() * spec.cell_volume();
            (rect - value).abs()
        }
    };
    Quadrature {
        value,
        error: error + support_jump_error(spec, values),
    }
}

/// One cell of mass for every grid edge that crosses the boundary of the
/// support (one end zero, the other positive).
///
/// A jump can sit anywhere inside its cell, which the coarsened rule cannot
/// see: both grids may count the same nodes. Zero for positive functions.
pub fn support_jump_error(spec: &GridSpec, values: &[f64]) -> f64 {
    let [m0, m1] = spec.shape();
    let cell = spec.cell_volume();
    let edge = |a: f64, b: f64| {
        if (a == 0.0) != (b == 0.0) {
            a.max(b).abs()
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    for i0 in 0..m0 {
        for i1 in 0..m1 {
            let k = i0 * m1 + i1;
            if i0 + 1 < m0 {
                total += edge(values[k], values[k + m1]);
            }
            if spec.dim() == 2 && i1 + 1 < m1 {
                total += edge(values[k], values[k + 1]);
            }
        }
    }
    total * cell
}

/// Per-axis partial derivatives sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    spec: GridSpec,
    components: Vec<Vec<f64>>,
}

impl Gradient {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    /// `|grad f|^2` at each node.
    pub fn norm_squared(&self) -> Vec<f64> {
        (0..self.spec.len())
            .map(|k| self.components.iter().map(|c| c[k] * c[k]).sum())
            .collect()
    }
}

/// Central differences in the interior, second-order one-sided differences
/// on the boundary. Exact on quadratics.
pub fn gradient_central(f: &GridFn) -> Result<Gradient> {
    if let Some(index) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let spec = &f.spec;
    let [m0, m1] = spec.shape();
    let mut components = Vec::with_capacity(spec.dim());
    for axis in 0..spec.dim() {
        let h = spec.spacing(axis);
        let (m, stride) = if axis == 0 { (m0, m1) } else { (m1, 1) };
        let mut out = vec![0.0; spec.len()];
        for (k, slot) in out.iter_mut().enumerate() {
            let i = spec.multi_index(k)[axis];
            let v = |j: usize| f.values[k - i * stride + j * stride];
            *slot = if i == 0 {
                (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h)
            } else if i == m - 1 {
                (3.0 * v(m - 1) - 4.0 * v(m - 2) + v(m - 3)) / (2.0 * h)
            } else {
                (v(i + 1) - v(i - 1)) / (2.0 * h)
            };
        }
        components.push(out);
    }
    Ok(Gradient {
        spec: spec.clone(),
        components,
    })
}

#[inline]
pub(crate) fn norm_sq(p: &Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: f64, hi: f64, m: usize) -> GridSpec {
        GridSpec::line(lo, hi, m).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::line(1.0, 1.0, 5).is_err());
        assert!(GridSpec::line(0.0, 1.0, 2).is_err());
        assert!(GridSpec::new(vec![]).is_err());
        assert!(GridSpec::cube(3, 0.0, 1.0, 5).is_err());
    }

    #[test]
    fn affine_indexing() {
        let s = line(-2.0, 2.0, 5);
        let xs: Vec<f64> = (0..5).map(|k| s.point(k)[0]).collect();
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(s.origin().unwrap(), [2, 0]);
        assert!(line(-1.0, 2.0, 3).origin().is_err());
        let sq = GridSpec::cube(2, -1.0, 1.0, 3).unwrap();
        assert_eq!(sq.point(sq.index(2, 0)), [1.0, -1.0]);
        assert_eq!(sq.multi_index(5), [1, 2]);
    }

    #[test]
    fn sample_quadratic() {
        let f = GridFn::from_fn(line(-2.0, 2.0, 5), Side::Convex, |x| x[0] * x[0] / 2.0).unwrap();
        assert_eq!(f.values(), &[2.0, 0.5, 0.0, 0.5, 2.0]);
    }

    #[test]
    fn side_invariants() {
        let s = line(-1.0, 1.0, 3);
        assert_eq!(
            GridFn::new(s.clone(), Side::Mass, vec![0.0, -1.0, 0.0]),
            Err(Error::InvalidMass {
                index: 1,
                value: -1.0
            })
        );
        assert_eq!(
            GridFn::new(s.clone(), Side::Mass, vec![0.0; 3]),
            Err(Error::ZeroMass)
        );
        assert_eq!(
            GridFn::new(s.clone(), Side::Convex, vec![0.0, f64::NEG_INFINITY, 0.0]),
            Err(Error::InvalidConvexValue { index: 1 })
        );
        assert_eq!(
            GridFn::new(s.clone(), Side::Convex, vec![f64::INFINITY; 3]),
            Err(Error::AllInfinite)
        );
        let c = GridFn::new(s, Side::Convex, vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(c.integrate(), Err(Error::WrongSide { .. })));
    }

    #[test]
    fn integrate_indicator() {
        let s = line(-2.0, 2.0, 4097);
        let h = s.spacing(0);
        let f = GridFn::from_fn(s, Side::Mass, |x| {
            if x[0].abs() <= 1.0 + 1e-12 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((f.integrate().unwrap() - 2.0).abs() <= h);
    }

    #[test]
    fn integrate_gaussian() {
        let f = GridFn::from_fn(line(-10.0, 10.0, 8193), Side::Mass, |x| {
            (-x[0] * x[0] / 2.0).exp()
        })
        .unwrap();
        let v = f.integrate().unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn integrate_2d_box() {
        let s = GridSpec::cube(2, -2.0, 2.0, 401).unwrap();
        let h = s.spacing(0);
        let f = GridFn::from_fn(s, Side::Mass, |x| {
            if x[0].abs() <= 1.0 + 1e-12 && x[1].abs() <= 0.5 + 1e-12 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let v = f.integrate().unwrap();
        // one boundary cell around a perimeter of length 6
        assert!((v - 2.0).abs() <= 6.0 * h);
    }

    #[test]
    fn refinement_is_second_order() {
        let exact = (std::f64::consts::PI).sqrt() * libm_erf(2.0);
        let err = |m: usize| {
            let f =
                GridFn::from_fn(line(-2.0, 2.0, m), Side::Mass, |x| (-x[0] * x[0]).exp()).unwrap();
            (f.integrate().unwrap() - exact).abs()
        };
        for m in [17usize, 33, 65, 129] {
            assert!(err(m) / err(2 * m - 1) >= 3.0, "m = {m}");
        }
    }

    // erf via its Taylor series; adequate at |x| <= 2.
    fn libm_erf(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..80 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn quadrature_error_estimate_is_nonnegative_and_small() {
        let s = line(-1.0, 1.0, 101);
        let vals: Vec<f64> = (0..101).map(|k| s.point(k)[0].powi(2)).collect();
        let q = quadrature(&s, &vals);
        assert!((q.value - 2.0 / 3.0).abs() <= q.error);
        let s = line(-1.0, 1.0, 100);
        let vals: Vec<f64> = (0..100).map(|k| s.point(k)[0].powi(2)).collect();
        assert!(quadrature(&s, &vals).error > 0.0);
    }

    #[test]
    fn gradient_linear_and_quadratic() {
        let s = line(-3.0, 5.0, 17);
        let lin = GridFn::from_fn(s.clone(), Side::Convex, |x| x[0]).unwrap();
        let g = gradient_central(&lin).unwrap();
        assert!(g.component(0).iter().all(|d| (d - 1.0).abs() < 1e-12));
        let q = GridFn::from_fn(s.clone(), Side::Convex, |x| x[0] * x[0] / 2.0).unwrap();
        let g = gradient_central(&q).unwrap();
        for k in 0..s.len() {
            assert!((g.component(0)[k] - s.point(k)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_cosine_taylor_bound() {
        let s = line(-8.0, 8.0, 4097);
        let h = s.spacing(0);
        let f = GridFn::from_fn(s.clone(), Side::Convex, |x| x[0].cos()).unwrap();
        let g = gradient_central(&f).unwrap();
        for k in 1..s.len() - 1 {
            let err = (g.component(0)[k] + s.point(k)[0].sin()).abs();
            assert!(err <= h * h / 6.0 + 1e-13);
        }
    }

    #[test]
    fn gradient_2d_affine() {
        let s = GridSpec::cube(2, -1.0, 1.0, 9).unwrap();
        let f =
            GridFn::from_fn(s.clone(), Side::Convex, |x| 2.0 * x[0] - 3.0 * x[1] + 1.0).unwrap();
        let g = gradient_central(&f).unwrap();
        assert!(g.component(0).iter().all(|d| (d - 2.0).abs() < 1e-12));
        assert!(g.component(1).iter().all(|d| (d + 3.0).abs() < 1e-12));
        assert!(g.norm_squared().iter().all(|d| (d - 13.0).abs() < 1e-11));
    }

    #[test]
    fn gradient_rejects_infinity() {
        let s = line(-1.0, 1.0, 3);
        let f = GridFn::new(s, Side::Convex, vec![0.0, 0.0, f64::INFINITY]).unwrap();
        assert_eq!(gradient_central(&f), Err(Error::NonFinite { index: 2 }));
    }

    #[test]
    fn coarsen_keeps_even_nodes() {
        let s = line(0.0, 4.0, 5);
        let f = GridFn::new(s, Side::Mass, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let c = f.coarsen().unwrap();
        assert_eq!(c.values(), &[0.0, 2.0, 4.0]);
    }
}
