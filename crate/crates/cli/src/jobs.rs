//! Single computations and the records they produce.

use std::time::Instant;

use acalc::alpha::{AlphaParam, FunctionDescriptor};
use acalc::extgrid::GridSpec;
use acalc::inequalities::{
    check_bbl, check_gaussian_poincare, check_poincare, check_urysohn, check_variation_formulas,
    urysohn_dual, CheckReport,
};
use acalc::meanwidth::{mean_width_limit, mean_width_repr, recommended_radius};

use crate::output::Record;
use crate::psi::Psi;

/// Grid options; missing fields take per-command defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOpts {
    pub n: usize,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub m: Option<usize>,
}

impl GridOpts {
    #[cfg(test)]
    pub fn dim(n: usize) -> Self {
        Self {
            n,
            lo: None,
            hi: None,
            m: None,
        }
    }

    fn resolve(&self, (lo, hi, m1, m2): (f64, f64, usize, usize)) -> acalc::Result<GridSpec> {
        if !(1..=2).contains(&self.n) {
            return Err(acalc::Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                self.n
            )));
        }
        let m = self.m.unwrap_or(if self.n == 1 { m1 } else { m2 });
        GridSpec::cube(self.n, self.lo.unwrap_or(lo), self.hi.unwrap_or(hi), m)
    }

    pub fn general(&self) -> acalc::Result<GridSpec> {
        if self.n == 2 {
            self.resolve((-3.0, 3.0, 801, 81))
        } else {
            self.resolve((-4.0, 4.0, 801, 81))
        }
    }

    /// Primal box `[-L, L]^n` with `L = 1.15 R + 1` for the recommended
    /// dual radius `R`.
    fn width(&self, beta: f64) -> acalc::Result<GridSpec> {
        let l = 1.15 * recommended_radius(self.n, beta)? + 1.0;
        self.resolve((-l, l, 8193, 161))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    MeanWidth {
        f: FunctionDescriptor,
        param: AlphaParam,
        schedule: Vec<f64>,
    },
    Bbl {
        f: FunctionDescriptor,
        g: FunctionDescriptor,
        param: AlphaParam,
        lambda: f64,
    },
    Urysohn {
        f: FunctionDescriptor,
        param: AlphaParam,
    },
    Poincare {
        psi: Psi,
        beta: f64,
    },
    GaussianPoincare {
        psi: Psi,
    },
    Variation {
        psi: Psi,
        t_step: f64,
    },
}

impl Job {
    pub fn name(&self) -> String {
        match self {
            Job::MeanWidth { f, .. } => format!("meanwidth[{f}]"),
            Job::Bbl { f, g, lambda, .. } => format!("bbl[{f};{g};lambda={lambda}]"),
            Job::Urysohn { f, .. } => format!("urysohn[{f}]"),
            Job::Poincare { psi, .. } => format!("poincare[{psi}]"),
            Job::GaussianPoincare { psi } => format!("gaussian-poincare[{psi}]"),
            Job::Variation { psi, t_step } => format!("variation[{psi};t={t_step}]"),
        }
    }

    /// `(alpha, beta)` reported in the record; NaN where no parameter applies.
    fn param(&self) -> (f64, f64) {
        match self {
            Job::MeanWidth { param, .. } | Job::Bbl { param, .. } | Job::Urysohn { param, .. } => {
                (param.alpha(), param.beta())
            }
            Job::Poincare { beta, .. } => (-1.0 / beta, *beta),
            Job::GaussianPoincare { .. } => (0.0, f64::INFINITY),
            Job::Variation { .. } => (f64::NAN, f64::NAN),
        }
    }

    pub fn run(&self, grid: &GridOpts, timing: bool) -> acalc::Result<Record> {
        let start = Instant::now();
        let (spec, report) = self.compute(grid)?;
        let (alpha, beta) = self.param();
        let n = grid.n;
        let kappa = match self {
            Job::Variation { .. } => f64::NAN,
            _ => AlphaParam::from_beta(beta)
                .and_then(|p| p.kappa(n))
                .unwrap_or(f64::NAN),
        };
        let runtime_ms = if timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        Ok(Record {
            name: self.name(),
            n,
            alpha,
            beta,
            kappa,
            lhs: report.lhs,
            rhs: report.rhs,
            slack: report.slack,
            tolerance: report.tolerance,
            pass: report.pass,
            grid_m: spec.axis(0).m,
            runtime_ms,
        })
    }

    fn compute(&self, grid: &GridOpts) -> acalc::Result<(GridSpec, CheckReport)> {
        match self {
            Job::MeanWidth { f, param, schedule } => {
                let spec = grid.width(param.beta())?;
                let af = f.to_alpha_fn(&spec, *param)?;
                let repr = mean_width_repr(&af, &urysohn_dual(&af)?)?;
                let limit = mean_width_limit(&af, schedule)?;
                // two-sided: the routes must agree to 1% relative
                let tol = 1e-2 * repr.value.abs() + 1e-10;
                let mut r = CheckReport::new("meanwidth", limit.value, repr.value, tol);
                r.pass = r.slack.abs() <= tol;
                Ok((spec, r))
            }
            Job::Bbl {
                f,
                g,
                param,
                lambda,
            } => {
                let spec = grid.general()?;
                let r = check_bbl(
                    &f.to_alpha_fn(&spec, *param)?,
                    &g.to_alpha_fn(&spec, *param)?,
                    *lambda,
                )?;
                Ok((spec, r))
            }
            Job::Urysohn { f, param } => {
                let spec = grid.width(param.beta())?;
                Ok((spec.clone(), check_urysohn(&f.to_alpha_fn(&spec, *param)?)?))
            }
            Job::Poincare { psi, beta } => {
                let spec = grid.resolve((-20.0, 20.0, 8001, 161))?;
                Ok((spec.clone(), check_poincare(&psi.sample(&spec)?, *beta)?))
            }
            Job::GaussianPoincare { psi } => {
                let spec = grid.resolve((-10.0, 10.0, 4001, 161))?;
                Ok((spec.clone(), check_gaussian_poincare(&psi.sample(&spec)?)?))
            }
            Job::Variation { psi, t_step } => {
                let spec = grid.resolve((-4.0, 4.0, 65537, 161))?;
                let phi0 = FunctionDescriptor::GAlpha.sample(
                    &spec,
                    acalc::extgrid::Side::Convex,
                    AlphaParam::log_concave(),
                )?;
                Ok((
                    spec.clone(),
                    check_variation_formulas(&phi0, &psi.sample(&spec)?, *t_step)?,
                ))
            }
        }
    }
}
