//! Selection strategies.
//!
//! Every strategy assigns a usefulness score to each unlabeled candidate and
//! the selector picks the highest score, breaking exact ties uniformly at
//! random. Scores where the underlying criterion is minimized (expected error
//! reduction) are negated so that the argmax is universal.

mod eer;
mod greedy;
mod pal;
mod qbc;
mod us;
mod xpal;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, Similarity};
use crate::model::{EvalCounter, FrequencyTable, PoolState, Prior, RiskMode};
use crate::rng::{self, StreamRng};

pub use eer::{eer_score, expected_error};
pub use greedy::greedy_all_score;
pub use pal::{pal_density, pal_score};
pub use qbc::{committee_disagreement, Committee};
pub use us::us_score;
pub use xpal::xgain;

pub const DEFAULT_ALPHA: f64 = 1e-3;
pub const DEFAULT_COMMITTEE_SIZE: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "xpal")]
    Xpal,
    #[serde(rename = "pal")]
    Pal,
    #[serde(rename = "eer")]
    Eer,
    #[serde(rename = "us")]
    Us,
    #[serde(rename = "qbc")]
    Qbc,
    #[serde(rename = "rand")]
    Rand,
    #[serde(rename = "greedy-all")]
    GreedyAll,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 7] = [
        StrategyKind::Xpal,
        StrategyKind::Pal,
        StrategyKind::Eer,
        StrategyKind::Us,
        StrategyKind::Qbc,
        StrategyKind::Rand,
        StrategyKind::GreedyAll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Xpal => "xpal",
            StrategyKind::Pal => "pal",
            StrategyKind::Eer => "eer",
            StrategyKind::Us => "us",
            StrategyKind::Qbc => "qbc",
            StrategyKind::Rand => "rand",
            StrategyKind::GreedyAll => "greedy-all",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::config(format!("unknown strategy `{s}`")))
    }
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_committee_size() -> usize {
    DEFAULT_COMMITTEE_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Symmetric Dirichlet prior value for xPAL.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Symmetric prior value for expected error reduction.
    #[serde(default = "default_alpha")]
    pub epsilon: f64,
    #[serde(default = "default_committee_size")]
    pub committee_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Display name; derived from the parameters when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub risk_mode: RiskMode,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            alpha: DEFAULT_ALPHA,
            epsilon: DEFAULT_ALPHA,
            committee_size: DEFAULT_COMMITTEE_SIZE,
            seed: 0,
            name: None,
            risk_mode: RiskMode::default(),
        }
    }

    pub fn xpal(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::new(StrategyKind::Xpal)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self.kind {
            StrategyKind::Xpal if !positive(self.alpha) => {
                Err(Error::config(format!("xpal needs alpha > 0, got {}", self.alpha)))
            }
            StrategyKind::Eer if !positive(self.epsilon) => {
                Err(Error::config(format!("eer needs epsilon > 0, got {}", self.epsilon)))
            }
            StrategyKind::Qbc if self.committee_size < 2 => Err(Error::config(format!(
                "qbc needs a committee of at least 2, got {}",
                self.committee_size
            ))),
            _ => Ok(()),
        }
    }

    /// Name used in result files, e.g. `xpal` or `xpal(alpha=1)`.
    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match self.kind {
            StrategyKind::Xpal if self.alpha != DEFAULT_ALPHA => format!("xpal(alpha={})", self.alpha),
            StrategyKind::Eer if self.epsilon != DEFAULT_ALPHA => format!("eer(epsilon={})", self.epsilon),
            StrategyKind::Qbc if self.committee_size != DEFAULT_COMMITTEE_SIZE => {
                format!("qbc(m={})", self.committee_size)
            }
            k => k.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub index: usize,
    /// Higher is more useful.
    pub score: f64,
}

/// Read-only view of the learner between acquisitions.
#[derive(Debug)]
pub struct Snapshot<'a, S: Similarity + ?Sized> {
    pub kernel: &'a S,
    pub state: &'a PoolState,
    /// Frequencies of `state`'s labeled set at every pool member.
    pub freqs: &'a FrequencyTable,
    /// Evaluation set for risk estimates (the whole pool).
    pub eval: &'a [usize],
}

impl<'a, S: Similarity + ?Sized> Snapshot<'a, S> {
    pub fn new(kernel: &'a S, state: &'a PoolState, freqs: &'a FrequencyTable, eval: &'a [usize]) -> Self {
        debug_assert_eq!(kernel.len(), state.pool_size());
        debug_assert_eq!(freqs.len(), state.pool_size());
        Self {
            kernel,
            state,
            freqs,
            eval,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.state.n_classes()
    }

    pub(crate) fn check_candidate(&self, candidate: usize) -> Result<()> {
        if self.state.is_candidate(candidate) {
            Ok(())
        } else {
            Err(Error::input(format!("index {candidate} is not an unlabeled candidate")))
        }
    }
}

/// Pool-level data some strategies need beyond the kernel.
#[derive(Debug, Clone, Copy)]
pub struct PoolContext<'a> {
    /// Feature rows of the pool, as fed to the kernel.
    pub features: &'a [Vec<f64>],
    pub kernel_spec: KernelSpec,
    /// True labels of the pool; only the GREEDY-ALL baseline reads them.
    pub true_labels: Option<&'a [usize]>,
}

/// Per-round state shared by all candidate scores of one selection.
#[derive(Debug, Clone)]
pub struct Round {
    index: u64,
    committee: Option<Committee>,
}

/// A configured strategy with its own random stream.
#[derive(Debug, Clone)]
pub struct Selector {
    config: StrategyConfig,
    prior: Prior,
    epsilon: Prior,
    seed: u64,
    rng: StreamRng,
    counter: EvalCounter,
}

impl Selector {
    /// `seed` keys every random decision of this selector (tie-breaking,
    /// committees, random scores).
    pub fn new(config: StrategyConfig, n_classes: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let prior = Prior::symmetric(config.alpha, n_classes)?;
        let epsilon = Prior::symmetric(config.epsilon, n_classes)?;
        Ok(Self {
            config,
            prior,
            epsilon,
            seed,
            rng: rng::stream(seed, &[0x71e]),
            counter: EvalCounter::default(),
        })
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    /// Accumulated risk-difference work (xPAL only).
    pub fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    /// Builds the per-round state; the round number is the current number of
    /// labels, so committees depend only on `(seed, |L|, member)`.
    pub fn prepare<S: Similarity + ?Sized>(&self, snap: &Snapshot<'_, S>, ctx: &PoolContext<'_>) -> Result<Round> {
        let index = snap.state.labeled().len() as u64;
        let committee = match self.config.kind {
            StrategyKind::Qbc => Some(Committee::draw(
                ctx.features,
                snap.state.labeled(),
                ctx.kernel_spec.kind,
                snap.n_classes(),
                self.config.committee_size,
                rng::derive_seed(self.seed, &[0xc0, index]),
            )?),
            _ => None,
        };
        Ok(Round { index, committee })
    }

    /// Score of one candidate. `row` is the candidate's feature row.
    pub fn score<S: Similarity + ?Sized>(
        &mut self,
        round: &Round,
        snap: &Snapshot<'_, S>,
        ctx: &PoolContext<'_>,
        candidate: usize,
        row: &[f64],
    ) -> Result<f64> {
        snap.check_candidate(candidate)?;
        let score = match self.config.kind {
            StrategyKind::Xpal => xgain(snap, candidate, &self.prior, self.config.risk_mode, &mut self.counter)?,
            StrategyKind::Pal => {
                let density = pal_density(snap.kernel, candidate, snap.eval)?;
                pal_score(snap, candidate, density)?
            }
            StrategyKind::Eer => eer_score(snap, candidate, &self.epsilon)?,
            StrategyKind::Us => us_score(snap, candidate)?,
            StrategyKind::Qbc => round
                .committee
                .as_ref()
                .map_or(0.0, |c| c.score(ctx.features, row)),
            StrategyKind::Rand => {
                let mut r = rng::stream(self.seed, &[0x7a4d, round.index, candidate as u64]);
                r.random::<f64>()
            }
            StrategyKind::GreedyAll => {
                let labels = ctx
                    .true_labels
                    .ok_or_else(|| Error::config("greedy-all needs the true labels of the pool"))?;
                greedy_all_score(snap, candidate, labels)?
            }
        };
        Ok(score)
    }

    /// Scores of every candidate in index order.
    pub fn score_all<S: Similarity + ?Sized>(
        &mut self,
        snap: &Snapshot<'_, S>,
        ctx: &PoolContext<'_>,
    ) -> Result<Vec<ScoredCandidate>> {
        let round = self.prepare(snap, ctx)?;
        snap.state
            .candidates()
            .map(|index| {
                let score = self.score(&round, snap, ctx, index, &ctx.features[index])?;
                Ok(ScoredCandidate { index, score })
            })
            .collect()
    }

    /// Picks the best-scoring candidate.
    pub fn select<S: Similarity + ?Sized>(&mut self, snap: &Snapshot<'_, S>, ctx: &PoolContext<'_>) -> Result<usize> {
        if snap.state.n_candidates() == 0 {
            return Err(Error::input("no candidates left to select from"));
        }
        let scores = self.score_all(snap, ctx)?;
        argmax_random_tie(&scores, &mut self.rng)
    }
}

/// Index with the largest score; exact ties are broken uniformly at random.
pub fn argmax_random_tie<R: Rng + ?Sized>(scores: &[ScoredCandidate], rng: &mut R) -> Result<usize> {
    if let Some(bad) = scores.iter().find(|s| s.score.is_nan()) {
        return Err(Error::input(format!("candidate {} has a NaN score", bad.index)));
    }
    let best = scores
        .iter()
        .map(|s| s.score)
        .fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = scores
        .iter()
        .filter(|s| s.score == best)
        .map(|s| s.index)
        .collect();
    match ties.len() {
        0 => Err(Error::input("no candidates to select from")),
        1 => Ok(ties[0]),
        n => Ok(ties[rng.random_range(0..n)]),
    }
}

/// One-shot selection: scores every candidate of `snap` with `strategy` and
/// returns the argmax. `seed` plays the role of the selector's stream.
pub fn select<S: Similarity + ?Sized>(
    strategy: &StrategyConfig,
    snap: &Snapshot<'_, S>,
    ctx: &PoolContext<'_>,
    seed: u64,
) -> Result<usize> {
    Selector::new(strategy.clone(), snap.n_classes(), seed)?.select(snap, ctx)
}
