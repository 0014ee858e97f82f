use thiserror::Error;

use crate::extgrid::Side;

/// Errors raised by grid construction, transforms, the alpha-concave algebra
/// and the inequality checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid value count {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("expected a {expected:?}-side function, found {found:?}-side")]
    WrongSide { expected: Side, found: Side },

    #[error("mass-side value {value} at grid index {index} is negative or not finite")]
    InvalidMass { index: usize, value: f64 },

    #[error("convex-side value at grid index {index} is -inf or NaN")]
    InvalidConvexValue { index: usize },

    #[error("mass-side function is identically zero")]
    ZeroMass,

    #[error("convex-side function is +inf everywhere")]
    AllInfinite,

    #[error("value at grid index {index} is not finite")]
    NonFinite { index: usize },

    #[error("functions live on different grids")]
    SpecMismatch,

    #[error("grid axis {axis} does not contain the origin as a node")]
    OriginNotOnGrid { axis: usize },

    #[error("convex base {value} at grid index {index} is not above -beta = {neg_beta}")]
    DomainViolation {
        index: usize,
        value: f64,
        neg_beta: f64,
    },

    #[error(
        "alpha-sum undefined: resulting base {value} at grid index {index} is not above -beta"
    )]
    SumUndefined { index: usize, value: f64 },

    #[error("alpha-sum undefined at epsilon = {epsilon}")]
    UndefinedAtEpsilon { epsilon: f64 },

    #[error("function is not alpha-concave: base fails convexity at grid index {index}")]
    NotConvex { index: usize },

    #[error("homothety factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("convex-combination weight must lie in (0, 1), got {0}")]
    InvalidLambda(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameters differ between operands")]
    ParamMismatch,

    #[error("kappa requires alpha >= -1/n (beta >= n): alpha = {alpha}, n = {n}")]
    KappaUndefined { alpha: f64, n: usize },

    #[error("requires beta > {bound}, got beta = {beta}")]
    BetaTooSmall { beta: f64, bound: f64 },

    #[error("integral of G_alpha diverges for beta = {beta} <= n/2 = {half_n}")]
    DivergentIntegral { beta: f64, half_n: f64 },

    #[error("log_gamma requires x > 0, got {0}")]
    NonPositiveArgument(f64),

    #[error("weight order must be 1 or 2, got {0}")]
    InvalidOrder(u32),

    #[error("domain too small: tail estimate {tail} exceeds 1% of the integral {integral}")]
    DomainTooSmall { tail: f64, integral: f64 },

    #[error("invalid epsilon schedule: {0}")]
    InvalidSchedule(String),

    #[error("cannot parse function descriptor `{0}`")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
