//! Independent reference implementations used as test oracles. Nothing here
//! touches the cached frequency tables or the fast paths of the library; every
//! quantity is recomputed from the labeled list and the raw kernel values.

#![allow(dead_code)]

use al_lab::kernel::{KernelMatrix, KernelSpec};
use al_lab::model::PoolState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

/// A random pool: symmetric kernel with unit diagonal, some labeled points.
pub struct Instance {
    pub n: usize,
    pub n_classes: usize,
    pub k: Vec<f64>,
    pub labeled: Vec<(usize, usize)>,
}

impl Instance {
    pub fn random(seed: u64, max_n: usize, max_classes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_classes = rng.random_range(2..=max_classes);
        let n = rng.random_range(3..=max_n);
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            k[i * n + i] = 1.0;
            for j in i + 1..n {
                // a share of exact zeros and exact ones exercises ties and skips
                let v = match rng.random_range(0..10) {
                    0 | 1 => 0.0,
                    2 => 1.0,
                    _ => rng.random::<f64>(),
                };
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let n_labeled = rng.random_range(0..n);
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let labeled = order[..n_labeled]
            .iter()
            .map(|&i| (i, rng.random_range(0..n_classes)))
            .collect();
        Self {
            n,
            n_classes,
            k,
            labeled,
        }
    }

    pub fn kernel(&self) -> KernelMatrix {
        KernelMatrix::from_values(self.n, self.k.clone(), KernelSpec::rbf(1.0).unwrap()).unwrap()
    }

    pub fn state(&self) -> PoolState {
        PoolState::from_labeled(self.n, self.n_classes, &self.labeled).unwrap()
    }

    pub fn candidates(&self) -> Vec<usize> {
        (0..self.n).filter(|i| self.labeled.iter().all(|(j, _)| j != i)).collect()
    }

    pub fn kv(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }

    /// Kernel frequency of `x` under `labeled`.
    pub fn freq(&self, labeled: &[(usize, usize)], x: usize) -> Vec<f64> {
        let mut f = vec![0.0; self.n_classes];
        for &(i, y) in labeled {
            f[y] += self.kv(x, i);
        }
        f
    }

    pub fn plus(&self, c: usize, y: usize) -> Vec<(usize, usize)> {
        let mut l = self.labeled.clone();
        l.push((c, y));
        l
    }
}

/// Most frequent class, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// `(k + a) / |k + a|_1`, uniform when the sum vanishes.
pub fn normalized(k: &[f64], a: f64) -> Vec<f64> {
    let s: f64 = k.iter().map(|v| v + a).sum();
    if s == 0.0 {
        return vec![1.0 / k.len() as f64; k.len()];
    }
    k.iter().map(|v| (v + a) / s).collect()
}

/// Least confidence: `1 - p(y_hat)` with unsmoothed probabilities.
pub fn us(inst: &Instance, c: usize) -> f64 {
    let k = inst.freq(&inst.labeled, c);
    1.0 - normalized(&k, 0.0)[argmax(&k)]
}

/// Expected error over the unlabeled pool in its `1 - max p` form.
pub fn eer(inst: &Instance, c: usize, eps: f64) -> f64 {
    let unlabeled = inst.candidates();
    let pc = normalized(&inst.freq(&inst.labeled, c), eps);
    let mut total = 0.0;
    for yc in 0..inst.n_classes {
        let l_plus = inst.plus(c, yc);
        let mean: f64 = unlabeled
            .iter()
            .map(|&x| {
                let p = normalized(&inst.freq(&l_plus, x), eps);
                1.0 - p.iter().copied().fold(f64::MIN, f64::max)
            })
            .sum::<f64>()
            / unlabeled.len() as f64;
        total += pc[yc] * mean;
    }
    total
}

/// Myopic PAL from the Beta-function product over labeling vectors: the
/// expected accuracy after one more label minus the current one, weighted by
/// the density. The candidate's own similarity is taken to be one.
pub fn pal_gamma(k: &[f64], density: f64) -> f64 {
    let c = k.len();
    let ones_sum: f64 = k.iter().map(|v| v + 1.0).sum();
    let current = {
        let p = normalized(k, 1.0);
        p[argmax(k)]
    };
    let mut expected = 0.0;
    for yc in 0..c {
        let l: Vec<usize> = (0..c).map(|i| usize::from(i == yc)).collect();
        let mut after = k.to_vec();
        after[yc] += 1.0;
        let dec = argmax(&after);
        let d: Vec<usize> = (0..c).map(|i| usize::from(i == dec)).collect();
        let steps: usize = (0..c).map(|i| l[i] + d[i]).sum();
        let part1: f64 = (0..steps).map(|t| 1.0 / (ones_sum + t as f64)).product();
        let part2: f64 = (0..c)
            .map(|i| (1..=l[i] + d[i]).map(|t| k[i] + t as f64).product::<f64>())
            .product();
        let l_sum: usize = l.iter().sum();
        let part3 = gamma(l_sum as f64 + 1.0) / l.iter().map(|&li| gamma(li as f64 + 1.0)).product::<f64>();
        expected += part1 * part2 * part3;
    }
    density * (expected - current)
}

/// Smoothed empirical risk of the classifier on `cls` with probabilities from `probs`.
pub fn smoothed_risk(inst: &Instance, probs: &[(usize, usize)], cls: &[(usize, usize)], alpha: f64, eval: &[usize]) -> f64 {
    eval.iter()
        .map(|&x| {
            let p = normalized(&inst.freq(probs, x), alpha);
            let f = argmax(&inst.freq(cls, x));
            p.iter().enumerate().filter(|(y, _)| *y != f).map(|(_, v)| v).sum::<f64>()
        })
        .sum::<f64>()
        / eval.len() as f64
}

/// Risk difference by its full definition.
pub fn risk_difference(inst: &Instance, c: usize, yc: usize, alpha: f64, eval: &[usize]) -> f64 {
    let l_plus = inst.plus(c, yc);
    smoothed_risk(inst, &l_plus, &l_plus, alpha, eval) - smoothed_risk(inst, &l_plus, &inst.labeled, alpha, eval)
}

/// Expected gain over the whole pool by its full definition.
pub fn xgain(inst: &Instance, c: usize, alpha: f64) -> f64 {
    let eval: Vec<usize> = (0..inst.n).collect();
    let pc = normalized(&inst.freq(&inst.labeled, c), alpha);
    -(0..inst.n_classes)
        .map(|yc| pc[yc] * risk_difference(inst, c, yc, alpha, &eval))
        .sum::<f64>()
}
