//! Experiment harness for distributed coreset clustering: dataset and
//! topology files, synthetic data, experiment configuration and
//! orchestration, result aggregation, and the oracle table behind
//! `dcoreset verify`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
mod error;
pub mod experiment;
pub mod io;
pub mod report;
pub mod synthetic;

pub use error::{HarnessError, Result};
