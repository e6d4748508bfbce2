use std::fs;
use std::path::Path;

use al_lab::data::{synthetic_blobs, SplitSpec};
use al_lab::harness::run_experiment_detailed;
use al_lab::strategies::StrategyConfig;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const SCALING_FILE: &str = "scaling.csv";
pub const COUNTERS_FILE: &str = "scaling_counters.csv";

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub class_counts: Vec<usize>,
    pub strategies: Vec<StrategyConfig>,
    /// Acquisitions timed per configuration.
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub strategy: String,
    pub n: usize,
    pub c: usize,
    pub seconds_per_acquisition: f64,
}

/// Work done by the risk-difference evaluations of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterRow {
    pub strategy: String,
    pub n: usize,
    pub c: usize,
    pub eval_size: usize,
    pub candidates_scored: u64,
    pub risk_differences: u64,
    pub loss_evaluations: u64,
    pub points_visited: u64,
}

impl CounterRow {
    /// Loss evaluations per risk difference; at most `eval_size`.
    pub fn loss_evaluations_per_candidate(&self) -> f64 {
        if self.risk_differences == 0 {
            return 0.0;
        }
        self.loss_evaluations as f64 / self.risk_differences as f64
    }
}

#[derive(Debug, Clone)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    pub counters: Vec<CounterRow>,
}

/// Times each strategy on synthetic blobs of every size and class count.
/// Runs sequentially so that timings do not compete for cores; only the
/// selection step is timed.
pub fn scaling(config: &ScalingConfig) -> Result<ScalingResult> {
    if config.budget == 0 {
        return Err(CliError::config("budget must be at least 1"));
    }
    if config.strategies.is_empty() || config.sizes.is_empty() || config.class_counts.is_empty() {
        return Err(CliError::config("scaling needs sizes, class counts and strategies"));
    }
    let mut rows = Vec::new();
    let mut counters = Vec::new();
    for s in &config.strategies {
        for &n in &config.sizes {
            for &c in &config.class_counts {
                let data = synthetic_blobs(n, c, config.seed)?;
                let trace = run_experiment_detailed(&data, s, &SplitSpec::new(config.seed, 0), config.budget)?;
                let secs = &trace.selection_seconds;
                rows.push(ScalingRow {
                    strategy: s.label(),
                    n,
                    c,
                    seconds_per_acquisition: secs.iter().sum::<f64>() / secs.len() as f64,
                });
                counters.push(CounterRow {
                    strategy: s.label(),
                    n,
                    c,
                    eval_size: trace.eval_size,
                    candidates_scored: trace.candidates_scored,
                    risk_differences: trace.counter.risk_differences,
                    loss_evaluations: trace.counter.loss_evaluations,
                    points_visited: trace.counter.points_visited,
                });
            }
        }
    }
    Ok(ScalingResult { rows, counters })
}

pub fn cmd_scaling(config: &ScalingConfig, out: &Path) -> Result<ScalingResult> {
    let result = scaling(config)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut w = csv::Writer::from_path(out.join(SCALING_FILE))?;
    for r in &result.rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(out.join(SCALING_FILE), e))?;
    let mut w = csv::Writer::from_path(out.join(COUNTERS_FILE))?;
    for r in &result.counters {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(out.join(COUNTERS_FILE), e))?;
    Ok(result)
}
