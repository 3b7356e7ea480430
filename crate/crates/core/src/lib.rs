//! Simulation of chirped electric-dipole spin resonance on a single electron
//! spin, resolving the spin-orbit line and the three hyperfine-mediated
//! lines of 75As, 69Ga and 71Ga.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod config;
pub mod drive;
pub mod ensemble;
pub mod error;
pub mod integrator;
pub mod output;
pub mod spin;
pub mod sweep;

pub use error::{Error, Result};
