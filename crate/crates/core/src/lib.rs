//! Radial basis function interpolation and least-squares approximation on
//! scattered data, with three ways of choosing the kernel shape parameter ε:
//!
//! * an exhaustive grid over leave-one-out errors computed with Rippa's rule
//!   ([`loocv::grid_search`]),
//! * a bounded univariate minimizer over the same error function
//!   ([`loocv::optimizer_search`]),
//! * Bayesian optimization of a validation objective with a Gaussian-process
//!   surrogate and Expected Improvement ([`bo::optimize`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing and the
//! command-line front end live in the `rbftune` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bo;
pub mod data;
mod error;
pub mod gp;
pub mod kernels;
pub mod linalg;
pub mod loocv;
pub mod rbf;

pub use error::{Error, Result};
