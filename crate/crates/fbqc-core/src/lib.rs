//! Quantitative comparison of fusion-based quantum computing schemes.
//!
//! Two capabilities built on a shared graph-state core:
//!
//! * resource-state preparation costs, in units of 3-qubit GHZ states,
//!   via optimized fusion schedules ([`cost`], [`optimize`]);
//! * loss-per-photon thresholds of encoded fusion networks via
//!   erasure-percolation Monte Carlo ([`fusion`], [`threshold`]).
//!
//! [`reports`] carries the embedded reference dataset and figure/report
//! emitters used by the CLI.

pub mod cost;
pub mod encode;
mod error;
pub mod fusion;
pub mod gf2;
pub mod graph;
pub mod lc;
pub mod optimize;
pub mod records;
pub mod reports;
pub mod tableau;
pub mod threshold;

pub use error::{Error, Result};
pub use fusion::{ExactDist, FloatDist};
pub use graph::{build_base_state, photon_count, GraphState, ResourceFamily, ShorCode};
