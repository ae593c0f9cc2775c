//! Solver library for the partition set cover problem: cover at least `k_t`
//! elements of each color class at minimum total set weight.
//!
//! The main pipeline strengthens the covering LP with lazily separated
//! knapsack-cover rows, covers the heavily-covered elements with a
//! deterministic set-cover rounder, and satisfies the residual color
//! requirements by iterated randomized rounding. Reductions turn facility
//! location and minimum-cost ball covering (both with per-color outlier
//! budgets) into the same pipeline. A branch-and-bound oracle provides exact
//! optima at small sizes for validation and benchmark ratios.
//!
//! Entry points:
//! - [`model::Instance`] and the JSON loader [`model::Instance::from_json`];
//! - [`rounding::solve`] for the full pipeline;
//! - [`partition::find_solution`] for the strengthened fractional solution;
//! - [`oracle::exact_opt`] for ground truth at small sizes;
//! - [`generators`] for instance families; [`fl`] and [`mcc`] for the
//!   facility-location and ball-covering reductions.

#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fl;
pub mod generators;
pub mod lp;
pub mod mcc;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod rng;
pub mod rounding;

pub use error::{Error, Result};
pub use model::{Cover, CoverageReport, Instance};
pub use rounding::{RounderKind, RoundingConfig, SolveOutput};
