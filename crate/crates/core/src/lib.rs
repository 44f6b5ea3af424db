#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod limit;
pub mod parallel;
pub mod rng;
pub mod voter;
pub mod dual;
pub mod kernel;

pub use error::{Error, Result};
