//! Numerical laboratory for weak fields in Finsler spaces.
//!
//! * [`tensor_core`]: rank-2 perturbations of Minkowski space and the
//!   determinant Lagrangian with its first and second order expansions.
//! * [`scalar_field`]: static radial solutions of the linear and strict
//!   scalar equations, the field-free shell and the divergent energy.
//! * [`vector_field`]: covector perturbations, gradient-invariant tensors,
//!   Maxwell residuals and sources.
//! * [`two_field`]: two coupled scalar fields, their residuals and 1+1D
//!   leapfrog evolution.
//! * [`berwald_moor`]: the fourth-order H4 metric, generalized momenta and
//!   rank-4 weak-field tensors.
//! * [`variational`]: stationary points of discretized radial actions.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod berwald_moor;
mod dual;
pub mod error;
pub mod field;
pub mod quadrature;
pub mod rng;
pub mod scalar_field;
pub mod tensor_core;
pub mod two_field;
pub mod variational;
pub mod vector_field;

pub use error::{Error, Result};
pub use tensor_core::{Point4, Sign, SymTensor2, ETA};
