//! Pool-based active learning with kernel frequency estimates.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernel`]: similarity functions, the mean bandwidth heuristic and dense
//!   kernel matrices over a training pool.
//! - [`model`]: kernel frequency estimates, the Parzen window classifier,
//!   Dirichlet-smoothed class probabilities and the smoothed empirical risk.
//! - [`strategies`]: xPAL and the competitor selection strategies (PAL, EER,
//!   US, QBC, random, GREEDY-ALL) behind a single argmax selector.
//! - [`data`]: CSV ingestion, z-standardization, seeded train/test splits and
//!   synthetic blobs.
//! - [`harness`]: the acquisition loop, learning curves, AULC, mean ranks and
//!   the Wilcoxon signed-rank test.
//!
//! Everything here is single-threaded and deterministic given its seeds;
//! callers that want parallelism run independent experiments concurrently.

pub mod data;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod model;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
