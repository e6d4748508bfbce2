//! Kernel frequency estimates, the Parzen window classifier and
//! Dirichlet-smoothed risk estimates.
//!
//! The classifier trained on a labeled set `L` predicts, at `x`, the class with
//! the largest similarity-weighted label count `k_x^L`. Class probabilities at
//! `x` are the posterior predictive of a Dirichlet prior `alpha` updated with
//! `k_x^L`, i.e. the normalized vector `k_x^L + alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Similarity;

/// Dirichlet prior parameters, one per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    alpha: Vec<f64>,
}

impl Prior {
    /// Entries must be finite and non-negative. A zero prior is only
    /// meaningful for uncertainty sampling.
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::input("prior needs at least one class"));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::input(format!("prior entries must be finite and >= 0, got {a}")));
        }
        Ok(Self { alpha })
    }

    pub fn symmetric(value: f64, n_classes: usize) -> Result<Self> {
        Self::new(vec![value; n_classes])
    }

    pub fn zero(n_classes: usize) -> Self {
        Self {
            alpha: vec![0.0; n_classes],
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn n_classes(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.alpha.iter().all(|&a| a > 0.0)
    }
}

/// Split of a training pool into labeled pairs and unlabeled candidates.
///
/// Labeled and candidate indices are disjoint and together cover the pool,
/// which is also the evaluation set used for risk estimates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    n_classes: usize,
    labeled: Vec<(usize, usize)>,
    candidate: Vec<bool>,
    n_candidates: usize,
}

impl PoolState {
    /// Everything unlabeled.
    pub fn new(pool_size: usize, n_classes: usize) -> Self {
        Self {
            n_classes,
            labeled: Vec::new(),
            candidate: vec![true; pool_size],
            n_candidates: pool_size,
        }
    }

    pub fn from_labeled(pool_size: usize, n_classes: usize, labeled: &[(usize, usize)]) -> Result<Self> {
        let mut state = Self::new(pool_size, n_classes);
        for &(i, y) in labeled {
            state.label(i, y)?;
        }
        Ok(state)
    }

    pub fn pool_size(&self) -> usize {
        self.candidate.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labeled(&self) -> &[(usize, usize)] {
        &self.labeled
    }

    pub fn is_candidate(&self, index: usize) -> bool {
        self.candidate.get(index).copied().unwrap_or(false)
    }

    pub fn candidates(&self) -> impl Iterator<Item = usize> + '_ {
        self.candidate
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
    }

    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    /// The whole pool, `L ∪ U`.
    pub fn evaluation_set(&self) -> Vec<usize> {
        (0..self.pool_size()).collect()
    }

    /// Moves `index` from the candidates into the labeled set.
    pub fn label(&mut self, index: usize, class: usize) -> Result<()> {
        if class >= self.n_classes {
            return Err(Error::input(format!(
                "class {class} out of range for {} classes",
                self.n_classes
            )));
        }
        if !self.is_candidate(index) {
            return Err(Error::input(format!("index {index} is not an unlabeled candidate")));
        }
        self.candidate[index] = false;
        self.n_candidates -= 1;
        self.labeled.push((index, class));
        Ok(())
    }

    /// Copy of this state with one more labeled pair.
    pub fn with_label(&self, index: usize, class: usize) -> Result<Self> {
        let mut next = self.clone();
        next.label(index, class)?;
        Ok(next)
    }

    /// If `self` equals `base` plus exactly one labeled pair, returns that pair.
    pub fn extension_of(&self, base: &PoolState) -> Option<(usize, usize)> {
        if self.pool_size() != base.pool_size()
            || self.n_classes != base.n_classes
            || self.labeled.len() != base.labeled.len() + 1
        {
            return None;
        }
        let mut mine = self.labeled.clone();
        let mut theirs = base.labeled.clone();
        mine.sort_unstable();
        theirs.sort_unstable();
        let extra = mine.iter().position(|p| theirs.binary_search(p).is_err())?;
        let pair = mine.remove(extra);
        (mine == theirs && base.is_candidate(pair.0)).then_some(pair)
    }
}

/// Cached kernel frequency estimates for every pool member, `n x C` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    n_classes: usize,
    counts: Vec<f64>,
}

impl FrequencyTable {
    pub fn zeros(pool_size: usize, n_classes: usize) -> Self {
        Self {
            n_classes,
            counts: vec![0.0; pool_size * n_classes],
        }
    }

    pub fn from_state<S: Similarity + ?Sized>(state: &PoolState, kernel: &S) -> Self {
        let mut table = Self::zeros(kernel.len(), state.n_classes());
        for &(i, y) in state.labeled() {
            table.add_label(kernel, i, y);
        }
        table
    }

    /// Adds the kernel column of a newly labeled `index` to class `class`.
    pub fn add_label<S: Similarity + ?Sized>(&mut self, kernel: &S, index: usize, class: usize) {
        let c = self.n_classes;
        for x in 0..self.len() {
            self.counts[x * c + class] += kernel.get(x, index);
        }
    }

    #[inline]
    pub fn get(&self, x: usize) -> &[f64] {
        &self.counts[x * self.n_classes..(x + 1) * self.n_classes]
    }

    pub fn len(&self) -> usize {
        self.counts.len() / self.n_classes.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }
}

/// `k_x^L[y]`: sum of `K(x, i)` over labeled pairs `(i, y)`.
pub fn kernel_frequency<S: Similarity + ?Sized>(state: &PoolState, kernel: &S, x: usize) -> Result<Vec<f64>> {
    if x >= kernel.len() {
        return Err(Error::input(format!("index {x} outside a pool of {}", kernel.len())));
    }
    let mut counts = vec![0.0; state.n_classes()];
    for &(i, y) in state.labeled() {
        counts[y] += kernel.get(x, i);
    }
    Ok(counts)
}

/// Most frequent class; ties go to the lowest class index.
#[inline]
pub fn predict(freq: &[f64]) -> usize {
    let mut best = 0;
    for (y, &v) in freq.iter().enumerate().skip(1) {
        if v > freq[best] {
            best = y;
        }
    }
    best
}

#[inline]
pub fn zero_one_loss(y: usize, prediction: usize) -> f64 {
    if y == prediction {
        0.0
    } else {
        1.0
    }
}

/// Writes `(freq + alpha) / ||freq + alpha||_1` into `out`, or the uniform
/// vector when the norm is zero.
#[inline]
pub(crate) fn posterior_into(freq: &[f64], alpha: &[f64], out: &mut [f64]) {
    let mut total = 0.0;
    for ((o, f), a) in out.iter_mut().zip(freq).zip(alpha) {
        *o = f + a;
        total += *o;
    }
    if total > 0.0 {
        out.iter_mut().for_each(|o| *o /= total);
    } else {
        let u = 1.0 / out.len() as f64;
        out.iter_mut().for_each(|o| *o = u);
    }
}

/// Posterior predictive class probabilities at a point with frequencies `freq`.
pub fn posterior_predictive(freq: &[f64], prior: &Prior) -> Result<Vec<f64>> {
    if freq.len() != prior.n_classes() {
        return Err(Error::DimensionMismatch {
            expected: prior.n_classes(),
            actual: freq.len(),
        });
    }
    if let Some(v) = freq.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::input(format!("frequencies must be finite and >= 0, got {v}")));
    }
    let mut out = vec![0.0; freq.len()];
    posterior_into(freq, prior.alpha(), &mut out);
    Ok(out)
}

fn check_eval<S: Similarity + ?Sized>(kernel: &S, eval: &[usize]) -> Result<()> {
    if eval.is_empty() {
        return Err(Error::input("evaluation set is empty"));
    }
    if let Some(x) = eval.iter().find(|&&x| x >= kernel.len()) {
        return Err(Error::input(format!("evaluation index {x} outside a pool of {}", kernel.len())));
    }
    Ok(())
}

/// Mean over `eval` of the expected zero-one loss of the classifier trained on
/// `classifier_state`, with class probabilities from `probability_state`
/// smoothed by `prior`. Computed directly from the definition.
pub fn smoothed_empirical_risk<S: Similarity + ?Sized>(
    probability_state: &PoolState,
    classifier_state: &PoolState,
    kernel: &S,
    prior: &Prior,
    eval: &[usize],
) -> Result<f64> {
    check_eval(kernel, eval)?;
    let mut total = 0.0;
    for &x in eval {
        let probs = posterior_predictive(&kernel_frequency(probability_state, kernel, x)?, prior)?;
        let prediction = predict(&kernel_frequency(classifier_state, kernel, x)?);
        total += probs
            .iter()
            .enumerate()
            .map(|(y, p)| p * zero_one_loss(y, prediction))
            .sum::<f64>();
    }
    Ok(total / eval.len() as f64)
}

/// Whether risk differences skip points whose decision does not change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMode {
    #[default]
    DecisionChange,
    FullSum,
}

/// Work counters for risk-difference evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    /// Number of risk differences computed.
    pub risk_differences: u64,
    /// Points at which the loss difference was actually summed.
    pub loss_evaluations: u64,
    /// Points visited across all risk differences.
    pub points_visited: u64,
}

impl EvalCounter {
    pub fn merge(&mut self, other: &EvalCounter) {
        self.risk_differences += other.risk_differences;
        self.loss_evaluations += other.loss_evaluations;
        self.points_visited += other.points_visited;
    }
}

/// `R(f^{L+}, L+) - R(f^L, L+)` over `eval`, where `L+` adds `(candidate, class)`
/// to the labeled set behind `freqs`.
///
/// In [`RiskMode::DecisionChange`] the loss difference is only summed where
/// the prediction changes; elsewhere it is zero by construction.
pub(crate) fn risk_difference_cached<S: Similarity + ?Sized>(
    freqs: &FrequencyTable,
    kernel: &S,
    candidate: usize,
    class: usize,
    alpha: &[f64],
    eval: &[usize],
    mode: RiskMode,
    counter: &mut EvalCounter,
) -> f64 {
    let c = freqs.n_classes();
    let mut plus = vec![0.0; c];
    let mut probs = vec![0.0; c];
    let mut total = 0.0;
    counter.risk_differences += 1;
    counter.points_visited += eval.len() as u64;
    for &x in eval {
        let base = freqs.get(x);
        let weight = kernel.get(candidate, x);
        let old = predict(base);
        if mode == RiskMode::DecisionChange && (weight == 0.0 || (weight > 0.0 && class == old)) {
            continue;
        }
        plus.copy_from_slice(base);
        plus[class] += weight;
        let new = predict(&plus);
        if mode == RiskMode::DecisionChange && new == old {
            continue;
        }
        counter.loss_evaluations += 1;
        posterior_into(&plus, alpha, &mut probs);
        total += probs
            .iter()
            .enumerate()
            .map(|(y, p)| p * (zero_one_loss(y, new) - zero_one_loss(y, old)))
            .sum::<f64>();
    }
    total / eval.len() as f64
}

/// Risk difference between the classifiers on `state_plus` and `state`, both
/// scored with probabilities from `state_plus`. `state_plus` must be `state`
/// plus one labeled pair.
pub fn risk_difference<S: Similarity + ?Sized>(
    state_plus: &PoolState,
    state: &PoolState,
    kernel: &S,
    prior: &Prior,
    eval: &[usize],
) -> Result<f64> {
    check_eval(kernel, eval)?;
    let (candidate, class) = state_plus
        .extension_of(state)
        .ok_or_else(|| Error::input("state_plus is not state plus exactly one labeled pair"))?;
    if prior.n_classes() != state.n_classes() {
        return Err(Error::DimensionMismatch {
            expected: state.n_classes(),
            actual: prior.n_classes(),
        });
    }
    let freqs = FrequencyTable::from_state(state, kernel);
    Ok(risk_difference_cached(
        &freqs,
        kernel,
        candidate,
        class,
        prior.alpha(),
        eval,
        RiskMode::DecisionChange,
        &mut EvalCounter::default(),
    ))
}
