use crate::error::Result;
use crate::kernel::Similarity;
use crate::model::posterior_into;

use super::Snapshot;

/// Least-confidence uncertainty: one minus the largest unsmoothed class
/// probability at the candidate (uniform when nothing is labeled nearby).
pub fn us_score<S: Similarity + ?Sized>(snap: &Snapshot<'_, S>, candidate: usize) -> Result<f64> {
    snap.check_candidate(candidate)?;
    let c = snap.n_classes();
    let mut probs = vec![0.0; c];
    posterior_into(snap.freqs.get(candidate), &vec![0.0; c], &mut probs);
    Ok(1.0 - probs.iter().copied().fold(0.0, f64::max))
}
