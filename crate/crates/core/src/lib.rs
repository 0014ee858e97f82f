//! Numerical calculus of alpha-concave functions.
//!
//! Functions live on uniform grids in one or two dimensions. The crate
//! provides discrete Legendre transforms and inf-convolutions, the
//! alpha-concave algebra built on convex bases, the alpha-mean width by two
//! routes, and verifiers for the Borell-Brascamp-Lieb, Urysohn and Poincare
//! type inequalities.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha;
pub mod error;
pub mod extgrid;
pub mod inequalities;
pub mod lft;
pub mod meanwidth;

pub use error::{Error, Result};
