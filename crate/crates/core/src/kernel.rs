//! Kernel functions, the mean bandwidth heuristic and dense kernel matrices.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Hamming,
    Cosine,
}

impl KernelKind {
    /// The kernel used for each kind of feature table.
    pub fn for_features(kind: FeatureKind) -> Self {
        match kind {
            FeatureKind::Numeric => KernelKind::Rbf,
            FeatureKind::Categorical => KernelKind::Hamming,
            FeatureKind::Tfidf => KernelKind::Cosine,
        }
    }

    pub fn accepts(self, kind: FeatureKind) -> bool {
        Self::for_features(kind) == self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Bandwidth coefficient; ignored by the cosine kernel.
    pub gamma: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, gamma: f64) -> Result<Self> {
        if kind != KernelKind::Cosine && !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::config(format!("{kind:?} kernel needs gamma > 0, got {gamma}")));
        }
        Ok(Self { kind, gamma })
    }

    pub fn rbf(gamma: f64) -> Result<Self> {
        Self::new(KernelKind::Rbf, gamma)
    }

    pub fn hamming(gamma: f64) -> Result<Self> {
        Self::new(KernelKind::Hamming, gamma)
    }

    pub fn cosine() -> Self {
        Self {
            kind: KernelKind::Cosine,
            gamma: 0.0,
        }
    }

    /// Kernel for a feature table with the bandwidth from [`mean_bandwidth`]
    /// over a pool of `n_pool` rows.
    pub fn for_pool(kind: FeatureKind, n_pool: usize, dims: usize) -> Result<Self> {
        match KernelKind::for_features(kind) {
            KernelKind::Cosine => Ok(Self::cosine()),
            k => Self::new(k, mean_bandwidth(n_pool, dims)?),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self.kind {
            KernelKind::Rbf => rbf_kernel(a, b, self.gamma),
            KernelKind::Hamming => hamming_kernel(a, b, self.gamma),
            KernelKind::Cosine => cosine_kernel(a, b),
        }
    }

    /// Kernel value on a subset of feature positions.
    pub(crate) fn eval_on(&self, a: &[f64], b: &[f64], dims: &[usize]) -> f64 {
        match self.kind {
            KernelKind::Rbf => {
                let d2: f64 = dims.iter().map(|&d| (a[d] - b[d]).powi(2)).sum();
                (-self.gamma * d2).exp()
            }
            KernelKind::Hamming => {
                let mismatches = dims.iter().filter(|&&d| a[d] != b[d]).count();
                (-self.gamma * mismatches as f64).exp()
            }
            KernelKind::Cosine => {
                let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
                for &d in dims {
                    ab += a[d] * b[d];
                    aa += a[d] * a[d];
                    bb += b[d] * b[d];
                }
                cosine_from_parts(ab, aa, bb)
            }
        }
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// `exp(-gamma * ||a - b||^2)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    check_dims(a, b)?;
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((-gamma * d2).exp())
}

/// `exp(-gamma * #mismatching positions)` over categorical codes.
pub fn hamming_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    check_dims(a, b)?;
    let mismatches = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok((-gamma * mismatches as f64).exp())
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine_kernel(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    Ok(cosine_from_parts(ab, aa, bb))
}

fn cosine_from_parts(ab: f64, aa: f64, bb: f64) -> f64 {
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0)
    }
}

/// Cap on the pool size entering the bandwidth formula.
pub const BANDWIDTH_POOL_CAP: usize = 200;

/// Bandwidth scale `s` of the mean criterion with unit feature variance:
/// `s^2 = 2 N D / ((N - 1) ln((N - 1) / delta^2))`, `delta = sqrt(2) * 1e-6`,
/// `N = min(n_pool, 200)`.
pub fn mean_bandwidth_scale(n_pool: usize, dims: usize) -> Result<f64> {
    if n_pool < 2 {
        return Err(Error::input(format!("bandwidth needs a pool of at least 2, got {n_pool}")));
    }
    if dims == 0 {
        return Err(Error::input("bandwidth needs at least one feature"));
    }
    let n = n_pool.min(BANDWIDTH_POOL_CAP) as f64;
    let delta_sq = 2.0e-12;
    let s_sq = 2.0 * n * dims as f64 / ((n - 1.0) * ((n - 1.0) / delta_sq).ln());
    Ok(s_sq.sqrt())
}

/// `gamma = 1 / (2 s^2)` with `s` from [`mean_bandwidth_scale`].
pub fn mean_bandwidth(n_pool: usize, dims: usize) -> Result<f64> {
    let s = mean_bandwidth_scale(n_pool, dims)?;
    Ok(1.0 / (2.0 * s * s))
}

/// Read access to pairwise similarities over a pool indexed `0..len()`.
pub trait Similarity: Sync {
    fn len(&self) -> usize;

    fn get(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Dense symmetric kernel matrix over a training pool, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
    spec: KernelSpec,
}

impl KernelMatrix {
    /// Wraps precomputed values. Only the upper triangle is read; the lower one
    /// is mirrored from it.
    pub fn from_values(n: usize, mut values: Vec<f64>, spec: KernelSpec) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: values.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                values[i * n + j] = values[j * n + i];
            }
        }
        Ok(Self { n, values, spec })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

impl Similarity for KernelMatrix {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Kernel matrix over all rows of `dataset`. Each pair is evaluated once and
/// mirrored, so the result is exactly symmetric.
pub fn build_kernel_matrix(dataset: &Dataset, spec: &KernelSpec) -> Result<KernelMatrix> {
    if dataset.is_empty() {
        return Err(Error::input("cannot build a kernel matrix for an empty dataset"));
    }
    if !spec.kind.accepts(dataset.kind()) {
        return Err(Error::config(format!(
            "{:?} kernel cannot be used with {} features",
            spec.kind,
            dataset.kind()
        )));
    }
    let rows = dataset.features();
    let n = rows.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            values[i * n + j] = spec.eval(&rows[i], &rows[j])?;
        }
    }
    KernelMatrix::from_values(n, values, *spec)
}

/// `out[i][j] = K(queries[i], pool[j])`, row-major `queries.len() x pool.len()`.
pub fn cross_kernel(queries: &[Vec<f64>], pool: &[Vec<f64>], spec: &KernelSpec) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(queries.len() * pool.len());
    for q in queries {
        for p in pool {
            out.push(spec.eval(q, p)?);
        }
    }
    Ok(out)
}

/// A pool extended by one extra point at index `base.len()`, whose similarities
/// to the pool are computed on demand. Used to score out-of-pool points.
#[derive(Debug, Clone)]
pub struct Augmented<'a> {
    base: &'a KernelMatrix,
    /// Similarities of the extra point to every pool member, then to itself.
    row: Vec<f64>,
}

impl<'a> Augmented<'a> {
    pub fn new(base: &'a KernelMatrix, pool: &[Vec<f64>], point: &[f64]) -> Result<Self> {
        if pool.len() != base.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                actual: pool.len(),
            });
        }
        let spec = base.spec();
        let mut row = pool
            .iter()
            .map(|p| spec.eval(point, p))
            .collect::<Result<Vec<_>>>()?;
        row.push(spec.eval(point, point)?);
        Ok(Self { base, row })
    }

    pub fn extra_index(&self) -> usize {
        self.base.len()
    }
}

impl Similarity for Augmented<'_> {
    fn len(&self) -> usize {
        self.base.len() + 1
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.base.len();
        match (i == n, j == n) {
            (false, false) => self.base.get(i, j),
            (true, _) => self.row[j],
            (false, true) => self.row[i],
        }
    }
}
