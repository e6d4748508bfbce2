use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{mean_bandwidth, KernelKind, KernelSpec};
use crate::model::posterior_into;
use crate::rng;

/// One bootstrap classifier: a resampled labeled set seen through a random
/// subset of the features.
#[derive(Debug, Clone, PartialEq)]
struct Member {
    labeled: Vec<(usize, usize)>,
    dims: Vec<usize>,
    spec: KernelSpec,
}

/// A committee of Parzen window classifiers trained on bootstrap resamples of
/// the labeled set, each restricted to `ceil(sqrt(D))` random features.
#[derive(Debug, Clone, PartialEq)]
pub struct Committee {
    n_classes: usize,
    members: Vec<Member>,
}

impl Committee {
    /// Draws `size` members. Member `m` uses the stream `(seed, m)`. With no
    /// labels every member is empty and [`Committee::score`] returns 0.
    pub fn draw(
        features: &[Vec<f64>],
        labeled: &[(usize, usize)],
        kind: KernelKind,
        n_classes: usize,
        size: usize,
        seed: u64,
    ) -> Result<Self> {
        if size < 2 {
            return Err(Error::config(format!("qbc needs a committee of at least 2, got {size}")));
        }
        let dims = features.first().map_or(0, Vec::len);
        if dims == 0 {
            return Err(Error::input("qbc needs at least one feature"));
        }
        if let Some(&(i, _)) = labeled.iter().find(|&&(i, _)| i >= features.len()) {
            return Err(Error::input(format!("labeled index {i} outside a pool of {}", features.len())));
        }
        let subset = (dims as f64).sqrt().ceil() as usize;
        let spec = match kind {
            KernelKind::Cosine => KernelSpec::cosine(),
            k => KernelSpec::new(k, mean_bandwidth(features.len().max(2), subset)?)?,
        };
        let members = (0..size as u64)
            .map(|m| {
                let mut r = rng::stream(seed, &[m]);
                let boot = if labeled.is_empty() {
                    Vec::new()
                } else {
                    (0..labeled.len())
                        .map(|_| labeled[r.random_range(0..labeled.len())])
                        .collect()
                };
                let mut chosen = sample(&mut r, dims, subset).into_vec();
                chosen.sort_unstable();
                Member {
                    labeled: boot,
                    dims: chosen,
                    spec,
                }
            })
            .collect();
        Ok(Self { n_classes, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Add-one smoothed class probabilities of every member at `row`.
    pub fn posteriors(&self, features: &[Vec<f64>], row: &[f64]) -> Vec<Vec<f64>> {
        let ones = vec![1.0; self.n_classes];
        self.members
            .iter()
            .map(|m| {
                let mut freq = vec![0.0; self.n_classes];
                for &(i, y) in &m.labeled {
                    freq[y] += m.spec.eval_on(row, &features[i], &m.dims);
                }
                let mut p = vec![0.0; self.n_classes];
                posterior_into(&freq, &ones, &mut p);
                p
            })
            .collect()
    }

    /// Mean divergence of the members from their consensus at `row`.
    pub fn score(&self, features: &[Vec<f64>], row: &[f64]) -> f64 {
        if self.members.iter().all(|m| m.labeled.is_empty()) {
            return 0.0;
        }
        committee_disagreement(&self.posteriors(features, row))
    }
}

/// `(1/M) sum_m KL(p_m || mean)`, where `mean` is the average distribution.
pub fn committee_disagreement(posteriors: &[Vec<f64>]) -> f64 {
    let Some(first) = posteriors.first() else {
        return 0.0;
    };
    let m = posteriors.len() as f64;
    let mut mean = vec![0.0; first.len()];
    for p in posteriors {
        for (acc, v) in mean.iter_mut().zip(p) {
            *acc += v / m;
        }
    }
    let kl: f64 = posteriors
        .iter()
        .map(|p| {
            p.iter()
                .zip(&mean)
                .filter(|(&pi, _)| pi > 0.0)
                .map(|(&pi, &qi)| pi * (pi / qi).ln())
                .sum::<f64>()
        })
        .sum();
    // rounding can leave a tiny negative sum for identical members
    (kl / m).max(0.0)
}
