//! Widths of mixed-norm balls and the weighted Besov embedding machinery built on them.
//!
//! The crate is split along the lines of the computation:
//! exact norms and inequalities ([`mixed_norm_core`]), closed-form order formulas
//! ([`width_formulas`]), numeric width estimation ([`finite_width_lab`]), the embedding
//! classifier and weights ([`besov_embedding`]), the dyadic covering ([`discretization_cover`])
//! and sweep/report plumbing shared with the command-line tool ([`cli_report`]).

pub mod besov_embedding;
pub mod cli_report;
pub mod discretization_cover;
mod error;
pub mod finite_width_lab;
pub mod mixed_norm_core;
pub mod rng;
pub mod scalar;
pub mod width_formulas;

pub use error::{Error, Result};
