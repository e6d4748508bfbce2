use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{split, Dataset, FeatureKind, SplitSpec, Standardizer};
use crate::error::{Error, Result};
use crate::kernel::{build_kernel_matrix, cross_kernel, KernelMatrix, KernelSpec};
use crate::model::{predict, EvalCounter, FrequencyTable, PoolState};
use crate::rng;
use crate::strategies::{PoolContext, Selector, Snapshot, StrategyConfig};

/// Test errors of one strategy on one split, after each acquisition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurveRecord {
    pub dataset: String,
    pub strategy: String,
    pub repetition: u32,
    pub seed: u64,
    pub errors: Vec<f64>,
}

/// A split with everything the acquisition loop needs precomputed.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub kernel: KernelMatrix,
    /// `K(test_t, train_i)`, row-major `|test| x |train|`.
    pub test_kernel: Vec<f64>,
}

impl PreparedSplit {
    /// Split, z-standardize numeric features with training statistics, pick
    /// the bandwidth from the training pool and build both kernel matrices.
    pub fn new(dataset: &Dataset, spec: &SplitSpec) -> Result<Self> {
        let parts = split(dataset, spec)?;
        let (train, test) = if dataset.kind() == FeatureKind::Numeric {
            let stats = Standardizer::fit(parts.train.features());
            (
                parts.train.with_features(stats.apply(parts.train.features()))?,
                parts.test.with_features(stats.apply(parts.test.features()))?,
            )
        } else {
            (parts.train, parts.test)
        };
        let kernel_spec = KernelSpec::for_pool(train.kind(), train.len(), train.dims())?;
        let kernel = build_kernel_matrix(&train, &kernel_spec)?;
        let test_kernel = cross_kernel(test.features(), train.features(), &kernel_spec)?;
        Ok(Self {
            train,
            test,
            train_indices: parts.train_indices,
            test_indices: parts.test_indices,
            kernel,
            test_kernel,
        })
    }

    pub fn kernel_spec(&self) -> KernelSpec {
        *self.kernel.spec()
    }
}

/// Full account of one run, for audits and timing.
#[derive(Debug, Clone)]
pub struct ExperimentTrace {
    pub record: LearningCurveRecord,
    /// Training-pool positions in acquisition order.
    pub selected: Vec<usize>,
    /// Parent-dataset rows of the training pool and the test set.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    /// Wall time spent choosing candidates, one entry per acquisition.
    pub selection_seconds: Vec<f64>,
    /// Number of candidate scores computed.
    pub candidates_scored: u64,
    /// Size of the evaluation set (the training pool).
    pub eval_size: usize,
    pub counter: EvalCounter,
}

/// Seed of a strategy's random stream; depends only on the split seed, the
/// repetition and the strategy label, never on scheduling.
pub fn strategy_seed(spec: &SplitSpec, strategy: &StrategyConfig) -> u64 {
    rng::derive_seed(
        spec.seed ^ strategy.seed,
        &[u64::from(spec.repetition), rng::stable_hash(&strategy.label())],
    )
}

pub fn run_experiment(
    dataset: &Dataset,
    strategy: &StrategyConfig,
    spec: &SplitSpec,
    budget: usize,
) -> Result<LearningCurveRecord> {
    run_experiment_detailed(dataset, strategy, spec, budget).map(|t| t.record)
}

pub fn run_experiment_detailed(
    dataset: &Dataset,
    strategy: &StrategyConfig,
    spec: &SplitSpec,
    budget: usize,
) -> Result<ExperimentTrace> {
    if budget == 0 {
        return Err(Error::config("budget must be at least 1"));
    }
    strategy.validate()?;
    let prepared = PreparedSplit::new(dataset, spec)?;
    run_prepared(&prepared, dataset.name(), strategy, spec, budget)
}

/// Acquisition loop on an already prepared split.
pub fn run_prepared(
    prepared: &PreparedSplit,
    dataset_name: &str,
    strategy: &StrategyConfig,
    spec: &SplitSpec,
    budget: usize,
) -> Result<ExperimentTrace> {
    if budget == 0 {
        return Err(Error::config("budget must be at least 1"));
    }
    let train = &prepared.train;
    let test = &prepared.test;
    let n_classes = train.n_classes();
    let pool = train.len();
    let seed = strategy_seed(spec, strategy);
    let mut selector = Selector::new(strategy.clone(), n_classes, seed)?;

    let mut state = PoolState::new(pool, n_classes);
    let mut freqs = FrequencyTable::zeros(pool, n_classes);
    let mut test_freqs = vec![0.0; test.len() * n_classes];
    let eval = state.evaluation_set();
    let ctx = PoolContext {
        features: train.features(),
        kernel_spec: prepared.kernel_spec(),
        true_labels: Some(train.labels()),
    };

    let steps = budget.min(pool);
    let mut errors = Vec::with_capacity(steps);
    let mut selected = Vec::with_capacity(steps);
    let mut selection_seconds = Vec::with_capacity(steps);
    let mut candidates_scored = 0u64;
    for _ in 0..steps {
        let snap = Snapshot::new(&prepared.kernel, &state, &freqs, &eval);
        candidates_scored += state.n_candidates() as u64;
        let start = Instant::now();
        let pick = selector.select(&snap, &ctx)?;
        selection_seconds.push(start.elapsed().as_secs_f64());

        let class = train.labels()[pick];
        state.label(pick, class)?;
        freqs.add_label(&prepared.kernel, pick, class);
        for t in 0..test.len() {
            test_freqs[t * n_classes + class] += prepared.test_kernel[t * pool + pick];
        }
        selected.push(pick);
        errors.push(test_error(&test_freqs, test.labels(), n_classes));
    }

    Ok(ExperimentTrace {
        record: LearningCurveRecord {
            dataset: dataset_name.to_string(),
            strategy: strategy.label(),
            repetition: spec.repetition,
            seed: spec.seed,
            errors,
        },
        selected,
        train_indices: prepared.train_indices.clone(),
        test_indices: prepared.test_indices.clone(),
        selection_seconds,
        candidates_scored,
        eval_size: eval.len(),
        counter: *selector.counter(),
    })
}

fn test_error(freqs: &[f64], labels: &[usize], n_classes: usize) -> f64 {
    let wrong = labels
        .iter()
        .enumerate()
        .filter(|&(t, &y)| predict(&freqs[t * n_classes..(t + 1) * n_classes]) != y)
        .count();
    wrong as f64 / labels.len() as f64
}
