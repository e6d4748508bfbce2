use crate::error::Result;
use crate::kernel::Similarity;
use crate::model::{posterior_into, predict, zero_one_loss, Prior};

use super::Snapshot;

/// Expected error reduction: the expected mean zero-one loss over the current
/// candidate pool after labeling `candidate`, with the candidate's label and
/// the class probabilities at each pool point smoothed by `epsilon`.
///
/// Only unlabeled points enter the average.
pub fn expected_error<S: Similarity + ?Sized>(snap: &Snapshot<'_, S>, candidate: usize, epsilon: &Prior) -> Result<f64> {
    snap.check_candidate(candidate)?;
    let eps = epsilon.alpha();
    let c = snap.n_classes();
    let unlabeled: Vec<usize> = snap.state.candidates().collect();
    let mut label_probs = vec![0.0; c];
    posterior_into(snap.freqs.get(candidate), eps, &mut label_probs);

    let mut plus = vec![0.0; c];
    let mut probs = vec![0.0; c];
    let mut expected = 0.0;
    for (class, p_class) in label_probs.iter().enumerate() {
        let mut loss = 0.0;
        for &x in &unlabeled {
            plus.copy_from_slice(snap.freqs.get(x));
            plus[class] += snap.kernel.get(candidate, x);
            let decision = predict(&plus);
            posterior_into(&plus, eps, &mut probs);
            loss += probs
                .iter()
                .enumerate()
                .map(|(y, p)| p * zero_one_loss(y, decision))
                .sum::<f64>();
        }
        expected += p_class * loss / unlabeled.len() as f64;
    }
    Ok(expected)
}

/// Negated [`expected_error`], so that larger is better.
pub fn eer_score<S: Similarity + ?Sized>(snap: &Snapshot<'_, S>, candidate: usize, epsilon: &Prior) -> Result<f64> {
    expected_error(snap, candidate, epsilon).map(|e| -e)
}
