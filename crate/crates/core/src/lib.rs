//! Randomly biased walks on supercritical Galton-Watson trees in the boundary case.
//!
//! The crate realizes the random environment lazily ([`environment`]), simulates
//! the quenched walk ([`walk`]), computes exact quenched hitting probabilities by
//! effective-conductance recursions ([`quenched`]), estimates branching-random-walk
//! expectations through the size-biased spine ([`spine`]), checks one-dimensional
//! random-walk estimates against lattice oracles ([`rw1d`]), and ties everything
//! together in a seeded experiment harness ([`harness`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod environment;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod logspace;
pub mod quenched;
pub mod rng;
pub mod rw1d;
pub mod spine;
pub mod walk;

pub use error::{Error, Result};
pub use estimate::{Estimate, EstimatorKind};
