use crate::error::Result;
use crate::kernel::Similarity;
use crate::model::{posterior_into, risk_difference_cached, EvalCounter, Prior, RiskMode};

use super::Snapshot;

/// Expected probabilistic gain of labeling `candidate`.
///
/// The candidate's label is simulated from the smoothed posterior at the
/// candidate; for each simulated label the smoothed risk difference over the
/// evaluation set is taken, and the negated expectation is returned. The
/// same prior smooths both the label distribution and the risk estimate.
pub fn xgain<S: Similarity + ?Sized>(
    snap: &Snapshot<'_, S>,
    candidate: usize,
    prior: &Prior,
    mode: RiskMode,
    counter: &mut EvalCounter,
) -> Result<f64> {
    snap.check_candidate(candidate)?;
    let alpha = prior.alpha();
    let mut label_probs = vec![0.0; snap.n_classes()];
    posterior_into(snap.freqs.get(candidate), alpha, &mut label_probs);
    let mut expected = 0.0;
    for (class, p) in label_probs.iter().enumerate() {
        let delta = risk_difference_cached(snap.freqs, snap.kernel, candidate, class, alpha, snap.eval, mode, counter);
        expected += p * delta;
    }
    Ok(-expected)
}
