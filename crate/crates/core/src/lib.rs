//! Learning the regularization parameter of inverse-problem solvers by empirical risk
//! minimization over a geometric grid.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod operators;
pub mod param_select;
pub mod rng;
pub mod spectral_reg;
pub mod theory_bounds;
pub mod variational_reg;

pub use error::{Error, Result};
