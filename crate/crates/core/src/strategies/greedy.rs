use crate::error::{Error, Result};
use crate::kernel::Similarity;
use crate::model::predict;

use super::Snapshot;

/// Omniscient baseline: labels the candidate with its true class and returns
/// the negated true empirical risk of the retrained classifier over the
/// evaluation set.
pub fn greedy_all_score<S: Similarity + ?Sized>(
    snap: &Snapshot<'_, S>,
    candidate: usize,
    true_labels: &[usize],
) -> Result<f64> {
    snap.check_candidate(candidate)?;
    if true_labels.len() != snap.state.pool_size() {
        return Err(Error::config(format!(
            "greedy-all needs {} true labels, got {}",
            snap.state.pool_size(),
            true_labels.len()
        )));
    }
    if snap.eval.is_empty() {
        return Err(Error::input("evaluation set is empty"));
    }
    let class = true_labels[candidate];
    let mut plus = vec![0.0; snap.n_classes()];
    let mut wrong = 0usize;
    for &x in snap.eval {
        let base = snap.freqs.get(x);
        let weight = snap.kernel.get(candidate, x);
        let decision = if weight == 0.0 {
            predict(base)
        } else {
            plus.copy_from_slice(base);
            plus[class] += weight;
            predict(&plus)
        };
        if decision != true_labels[x] {
            wrong += 1;
        }
    }
    Ok(-(wrong as f64) / snap.eval.len() as f64)
}
