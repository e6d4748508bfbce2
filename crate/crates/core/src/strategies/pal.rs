use crate::error::{Error, Result};
use crate::kernel::Similarity;
use crate::model::{posterior_into, predict, zero_one_loss};

use super::Snapshot;

/// Parzen density estimate at `candidate`: the mean kernel value over `eval`.
pub fn pal_density<S: Similarity + ?Sized>(kernel: &S, candidate: usize, eval: &[usize]) -> Result<f64> {
    if eval.is_empty() {
        return Err(Error::input("density needs a nonempty evaluation set"));
    }
    if candidate >= kernel.len() {
        return Err(Error::input(format!("index {candidate} outside a pool of {}", kernel.len())));
    }
    Ok(eval.iter().map(|&x| kernel.get(candidate, x)).sum::<f64>() / eval.len() as f64)
}

/// Myopic probabilistic active learning: the density-weighted expected gain in
/// accuracy at the candidate itself, with a uniform prior of one pseudo-count
/// per class.
pub fn pal_score<S: Similarity + ?Sized>(snap: &Snapshot<'_, S>, candidate: usize, density: f64) -> Result<f64> {
    snap.check_candidate(candidate)?;
    if !(density >= 0.0) {
        return Err(Error::input(format!("density must be >= 0, got {density}")));
    }
    let c = snap.n_classes();
    let ones = vec![1.0; c];
    let freq = snap.freqs.get(candidate);
    let self_similarity = snap.kernel.get(candidate, candidate);
    let current = predict(freq);
    let mut label_probs = vec![0.0; c];
    posterior_into(freq, &ones, &mut label_probs);

    let mut plus = vec![0.0; c];
    let mut probs = vec![0.0; c];
    let mut expected = 0.0;
    for (class, p_class) in label_probs.iter().enumerate() {
        plus.copy_from_slice(freq);
        plus[class] += self_similarity;
        let next = predict(&plus);
        posterior_into(&plus, &ones, &mut probs);
        let delta: f64 = probs
            .iter()
            .enumerate()
            .map(|(y, p)| p * (zero_one_loss(y, next) - zero_one_loss(y, current)))
            .sum();
        expected += p_class * delta;
    }
    Ok(-density * expected)
}
