//! Numerical testbed for information-theoretic limits of adaptive control
//! and system identification.

pub mod control;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod identification;
pub mod kernel;
pub mod linalg;
pub mod meta;
pub mod rng;
pub mod stats;

/// Parameter point: `A` for linear models, a column for the others.
pub type Point = nalgebra::DMatrix<f64>;

pub use error::{Error, Result};
