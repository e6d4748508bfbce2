use std::fs;
use std::path::{Path, PathBuf};

use al_lab::data::{Dataset, FeatureKind, Standardizer};
use al_lab::kernel::{build_kernel_matrix, Augmented, KernelSpec};
use al_lab::model::{FrequencyTable, PoolState};
use al_lab::rng;
use al_lab::strategies::{PoolContext, Selector, Snapshot, StrategyConfig, StrategyKind};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const GRID_FILE: &str = "landscape_grid.csv";
pub const LABELED_FILE: &str = "landscape_labeled.csv";

/// How the labeled points behind a landscape are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LabeledMode {
    /// Acquired by the strategy itself.
    StrategyChosen,
    /// Drawn uniformly at random.
    Random,
}

#[derive(Debug, Clone)]
pub struct LandscapeConfig {
    pub strategy: StrategyConfig,
    pub mode: LabeledMode,
    pub n_labels: usize,
    /// Points per grid axis.
    pub resolution: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledPoint {
    pub order: usize,
    pub x: f64,
    pub y: f64,
    pub class: usize,
}

#[derive(Debug, Clone)]
pub struct Landscape {
    pub grid: Vec<GridPoint>,
    pub labeled: Vec<LabeledPoint>,
}

/// Usefulness of every point of a regular grid over a 2-D dataset.
///
/// The whole dataset forms the pool. Each grid point is scored as an extra
/// unlabeled candidate whose similarities to the pool are computed on
/// demand; it also joins the evaluation set for its own score. The pool
/// state is never modified by grid scoring.
pub fn landscape(dataset: &Dataset, config: &LandscapeConfig) -> Result<Landscape> {
    if dataset.kind() != FeatureKind::Numeric || dataset.dims() != 2 {
        return Err(al_lab::Error::Input(format!(
            "landscapes need 2-D numeric data, `{}` has {} {} features",
            dataset.name(),
            dataset.dims(),
            dataset.kind()
        ))
        .into());
    }
    if config.strategy.kind == StrategyKind::GreedyAll {
        return Err(CliError::config("greedy-all needs true labels and cannot score grid points"));
    }
    if config.resolution < 2 {
        return Err(CliError::config("grid resolution must be at least 2"));
    }
    if config.n_labels >= dataset.len() {
        return Err(CliError::config(format!(
            "cannot label {} of {} points and keep candidates",
            config.n_labels,
            dataset.len()
        )));
    }
    let stats = Standardizer::fit(dataset.features());
    let pool = stats.apply(dataset.features());
    let n = pool.len();
    let c = dataset.n_classes();
    let spec = KernelSpec::for_pool(FeatureKind::Numeric, n, 2)?;
    let kernel = build_kernel_matrix(&dataset.with_features(pool.clone())?, &spec)?;
    let eval: Vec<usize> = (0..n).collect();
    let mut selector = Selector::new(config.strategy.clone(), c, config.seed)?;

    let mut state = PoolState::new(n, c);
    let mut freqs = FrequencyTable::zeros(n, c);
    let ctx = PoolContext {
        features: &pool,
        kernel_spec: spec,
        true_labels: None,
    };
    let picks: Vec<usize> = match config.mode {
        LabeledMode::Random => sample(&mut rng::stream(config.seed, &[0x1a5e]), n, config.n_labels).into_vec(),
        LabeledMode::StrategyChosen => {
            let mut picks = Vec::with_capacity(config.n_labels);
            let mut s = state.clone();
            let mut f = freqs.clone();
            for _ in 0..config.n_labels {
                let i = selector.select(&Snapshot::new(&kernel, &s, &f, &eval), &ctx)?;
                s.label(i, dataset.labels()[i])?;
                f.add_label(&kernel, i, dataset.labels()[i]);
                picks.push(i);
            }
            picks
        }
    };
    for &i in &picks {
        state.label(i, dataset.labels()[i])?;
        freqs.add_label(&kernel, i, dataset.labels()[i]);
    }

    let round = selector.prepare(&Snapshot::new(&kernel, &state, &freqs, &eval), &ctx)?;
    let (lo, hi) = bounds(dataset.features());
    let axis = |d: usize, k: usize| lo[d] + (hi[d] - lo[d]) * k as f64 / (config.resolution - 1) as f64;
    let aug_eval: Vec<usize> = (0..=n).collect();
    let mut grid = Vec::with_capacity(config.resolution * config.resolution);
    for iy in 0..config.resolution {
        for ix in 0..config.resolution {
            let (x, y) = (axis(0, ix), axis(1, iy));
            let row = stats.apply(&[vec![x, y]]).remove(0);
            let aug = Augmented::new(&kernel, &pool, &row)?;
            let aug_state = PoolState::from_labeled(n + 1, c, state.labeled())?;
            let aug_freqs = FrequencyTable::from_state(&aug_state, &aug);
            let snap = Snapshot::new(&aug, &aug_state, &aug_freqs, &aug_eval);
            let score = selector.score(&round, &snap, &ctx, aug.extra_index(), &row)?;
            grid.push(GridPoint { x, y, score });
        }
    }
    let labeled = picks
        .iter()
        .enumerate()
        .map(|(order, &i)| LabeledPoint {
            order: order + 1,
            x: dataset.features()[i][0],
            y: dataset.features()[i][1],
            class: dataset.labels()[i],
        })
        .collect();
    Ok(Landscape { grid, labeled })
}

/// Per-axis range padded by 5% on each side.
fn bounds(rows: &[Vec<f64>]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for r in rows {
        for d in 0..2 {
            lo[d] = lo[d].min(r[d]);
            hi[d] = hi[d].max(r[d]);
        }
    }
    for d in 0..2 {
        let pad = ((hi[d] - lo[d]) * 0.05).max(1e-9);
        lo[d] -= pad;
        hi[d] += pad;
    }
    (lo, hi)
}

pub fn cmd_landscape(dataset: &Dataset, config: &LandscapeConfig) -> Result<Landscape> {
    let result = landscape(dataset, config)?;
    write_landscape(&result, &config.out)?;
    Ok(result)
}

pub fn write_landscape(result: &Landscape, out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut w = csv::Writer::from_path(out.join(GRID_FILE))?;
    for p in &result.grid {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| CliError::io(out.join(GRID_FILE), e))?;
    let mut w = csv::Writer::from_path(out.join(LABELED_FILE))?;
    for p in &result.labeled {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| CliError::io(out.join(LABELED_FILE), e))
}
