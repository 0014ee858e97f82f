use serde::Serialize;

use crate::error::Result;
use crate::extgrid::{GridFn, Point, Side};

const TOL: f64 = 1e-10;

/// Outcome of the midpoint alpha-concavity test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub alpha: f64,
    pub pass: bool,
    /// Largest `M_alpha(f(x), f(y)) - f((x+y)/2)` seen (0 when nothing is violated).
    pub worst_violation: f64,
    /// Grid index and point of the worst midpoint, if any violation occurred.
    pub location: Option<(usize, Point)>,
    /// Number of (x, y) pairs tested.
    pub pairs: usize,
}

fn power_mean(a: f64, b: f64, alpha: f64) -> f64 {
    if alpha == f64::NEG_INFINITY {
        a.min(b)
    } else if alpha == f64::INFINITY {
        a.max(b)
    } else if alpha == 0.0 {
        (a * b).sqrt()
    } else {
        ((a.powf(alpha) + b.powf(alpha)) / 2.0).powf(1.0 / alpha)
    }
}

/// Checks `f((x+y)/2) >= M_alpha(f(x), f(y))` over every pair of support
/// nodes whose midpoint is a node. `alpha` may be any extended real; the
/// limits use min, geometric mean and max.
pub fn is_alpha_concave(f: &GridFn, alpha: f64) -> Result<ConcavityReport> {
    f.require_side(Side::Mass)?;
    let spec = f.spec();
    let [_, m1] = spec.shape();
    let vals = f.values();
    let support: Vec<(usize, [usize; 2])> = (0..spec.len())
        .filter(|&k| vals[k] > 0.0)
        .map(|k| (k, spec.multi_index(k)))
        .collect();

    let mut worst = 0.0;
    let mut location = None;
    let mut pairs = 0;
    for (a, &(i, ii)) in support.iter().enumerate() {
        for &(j, jj) in &support[a..] {
            let (s0, s1) = (ii[0] + jj[0], ii[1] + jj[1]);
            if s0 % 2 != 0 || s1 % 2 != 0 {
                continue;
            }
            pairs += 1;
            let mid = (s0 / 2) * m1 + s1 / 2;
            let mean = power_mean(vals[i], vals[j], alpha);
            let gap = mean - vals[mid];
            if gap > TOL * mean.max(1.0) && gap > worst {
                worst = gap;
                location = Some((mid, spec.point(mid)));
            }
        }
    }
    Ok(ConcavityReport {
        alpha,
        pass: location.is_none(),
        worst_violation: worst,
        location,
        pairs,
    })
}
