//! Benchmark runner for the `al_lab` active-learning library.
//!
//! Subcommands live in their own modules and are plain functions so they can
//! be driven from tests as well as from the binary. All parallelism is here:
//! `run` spreads repetitions over a worker pool, everything else is
//! sequential.

pub mod cli;
pub mod config;
pub mod error;
pub mod landscape;
pub mod report;
pub mod run;
pub mod scaling;

pub use error::{CliError, Result};
