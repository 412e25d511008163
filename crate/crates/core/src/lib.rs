//! Laboratory for mixing of the asymmetric simple exclusion process.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hecke;
pub mod lattice;
pub mod rng;
pub mod stationary;
pub mod tracy_widom;

pub use error::{Error, Result};
