//! Communication-aware distributed coreset construction for k-means and
//! k-median clustering over arbitrary connected communication graphs.
//!
//! Every site computes a constant-factor local solution, the sites exchange
//! a single cost value each, and every site then samples its own share of a
//! global coreset in proportion to how much of the total cost it carries. The
//! union of the per-site portions is a coreset for the global data.
//!
//! This crate is `no_std` (it needs `alloc`) and contains only the algorithmic
//! parts: geometry and costs, local solvers, coreset construction, the
//! network simulator with its communication ledger, data partitioning, the
//! two baselines, and executable oracles. File formats, the experiment
//! harness and the CLI live in the `dcoreset` crate.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod coreset;
mod error;
pub mod geometry;
pub mod network;
pub mod partition;
pub(crate) mod sampling;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{closest_center, cost, distance, Centers, Objective, Point, WeightedPointSet};
