//! Nonlocal mean-field interface model: stationary fronts, relaxation and
//! forced dynamics, large-deviation costs, front localization and
//! macroscopic strategies for moving interfaces.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod action;
pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod io;
pub mod macro_model;
pub mod model;
pub mod statics;

#[cfg(test)]
pub(crate) mod testutil;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use grid::{Boundary, Grid, Kernel, NuWeights, Profile};
pub use model::Model;
pub use statics::Instanton;
