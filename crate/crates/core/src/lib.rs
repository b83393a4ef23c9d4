//! Agent-based simulation of pairwise time-preference interactions on top of
//! Ramsey-Cass-Koopmans capital and consumption dynamics.
//!
//! Agents start identical at the saddle point of a common discount rate.
//! Periodically a random pair compares capital and consumption (and a shared
//! normative rate), both discount rates move, and both agents jump onto the
//! stable arm towards their new saddle points. The resulting distributions of
//! discount rate, capital, consumption and lifetime utility are summarized by
//! CV, Gini, skewness and kurtosis.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod econ;
pub mod engine;
pub mod error;
pub mod interaction;
pub mod metrics;
pub mod output;
pub mod utility;

pub use econ::{AdjustmentPath, EconomyParams, SteadyState};
pub use engine::{run, run_with, Execution, Population, RunResult, SimConfig};
pub use error::{Error, Result};
pub use interaction::{InteractionMode, InteractionParams};
pub use metrics::{summary, SummaryStats};
