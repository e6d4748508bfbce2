//! Dataset ingestion, preprocessing, splitting and synthetic generation.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    /// Integer-coded categorical levels.
    Categorical,
    /// Pre-vectorized TF-IDF weights.
    Tfidf,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Categorical => "categorical",
            FeatureKind::Tfidf => "tfidf",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "numeric" => Ok(FeatureKind::Numeric),
            "categorical" => Ok(FeatureKind::Categorical),
            "tfidf" => Ok(FeatureKind::Tfidf),
            other => Err(Error::config(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// A labelled feature table. Rows are instances; labels are class indices in
/// `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
    class_names: Vec<String>,
    kind: FeatureKind,
}

impl Dataset {
    /// Builds a dataset, checking that rows are rectangular, `N >= 2`, and
    /// that every class in `0..=max(label)` occurs.
    pub fn new(
        name: impl Into<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        kind: FeatureKind,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                actual: labels.len(),
            });
        }
        if features.len() < 2 {
            return Err(Error::input("a dataset needs at least two instances"));
        }
        let dims = features[0].len();
        if let Some(row) = features.iter().position(|r| r.len() != dims) {
            return Err(Error::input(format!(
                "row {row} has {} features, expected {dims}",
                features[row].len()
            )));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; n_classes];
        labels.iter().for_each(|&y| seen[y] = true);
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::input(format!("class {missing} has no instances")));
        }
        let class_names = (0..n_classes).map(|c| c.to_string()).collect();
        Ok(Self {
            name: name.into(),
            features,
            labels,
            n_classes,
            class_names,
            kind,
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_classes {
            return Err(Error::DimensionMismatch {
                expected: self.n_classes,
                actual: names.len(),
            });
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Row subset that keeps the parent's class count, even if some classes
    /// are absent from the subset.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            class_names: self.class_names.clone(),
            kind: self.kind,
        }
    }

    /// Same labels and metadata with replaced feature rows.
    pub fn with_features(&self, features: Vec<Vec<f64>>) -> Result<Dataset> {
        if features.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: features.len(),
            });
        }
        Ok(Dataset {
            features,
            ..self.clone()
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        self.labels.iter().for_each(|&y| counts[y] += 1);
        counts
    }

    /// Writes the table as CSV with a `class` column holding class names.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        let header: Vec<String> = (0..self.dims())
            .map(|d| format!("x{d}"))
            .chain(std::iter::once("class".to_string()))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (row, &y) in self.features.iter().zip(&self.labels) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{}", cells.join(","), self.class_names[y])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("class".into())
    }
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Assigns integer codes in order of first appearance.
#[derive(Default)]
struct Coder {
    codes: HashMap<String, usize>,
    names: Vec<String>,
}

impl Coder {
    fn code(&mut self, value: &str) -> usize {
        if let Some(&c) = self.codes.get(value) {
            return c;
        }
        let c = self.names.len();
        self.codes.insert(value.to_string(), c);
        self.names.push(value.to_string());
        c
    }
}

/// Reads a UTF-8, comma-separated table with a header row.
///
/// Numeric and TF-IDF columns are parsed as reals; categorical columns and the
/// label column are integer-coded by first appearance.
pub fn load_csv(path: impl AsRef<Path>, kind: FeatureKind, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let fail = |message: String| Error::Ingestion {
        path: path.to_path_buf(),
        message,
    };
    let file = File::open(path).map_err(|e| fail(e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| fail(e.to_string()))?
        .clone();
    let label_idx = match label {
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => {
            return Err(fail(format!(
                "label column {i} out of range ({} columns)",
                headers.len()
            )))
        }
        LabelColumn::Name(n) => headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| fail(format!("no label column named `{n}`")))?,
    };
    if headers.len() < 2 {
        return Err(fail("need at least one feature column and a label column".into()));
    }

    let mut column_coders: Vec<Coder> = (0..headers.len()).map(|_| Coder::default()).collect();
    let mut labels_coder = Coder::default();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let record = record.map_err(|e| fail(format!("line {line}: {e}")))?;
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (col, cell) in record.iter().enumerate() {
            let column = &headers[col];
            if col == label_idx {
                if cell.is_empty() {
                    return Err(fail(format!("line {line}: empty label in column `{column}`")));
                }
                labels.push(labels_coder.code(cell));
                continue;
            }
            let value = match kind {
                FeatureKind::Categorical => {
                    if cell.is_empty() {
                        return Err(fail(format!("line {line}, column `{column}`: empty cell")));
                    }
                    column_coders[col].code(cell) as f64
                }
                FeatureKind::Numeric | FeatureKind::Tfidf => {
                    match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => v,
                        _ => {
                            return Err(fail(format!(
                                "line {line}, column `{column}`: cannot parse `{cell}` as a number"
                            )))
                        }
                    }
                }
            };
            row.push(value);
        }
        features.push(row);
    }
    if labels_coder.names.len() < 2 {
        return Err(fail(format!(
            "need at least two classes, found {}",
            labels_coder.names.len()
        )));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(name, features, labels, kind)
        .and_then(|d| d.with_class_names(labels_coder.names))
        .map_err(|e| fail(e.to_string()))
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dims = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mean: Vec<f64> = (0..dims)
            .map(|d| rows.iter().map(|r| r[d]).sum::<f64>() / n)
            .collect();
        let std = (0..dims)
            .map(|d| {
                let var = rows.iter().map(|r| (r[d] - mean[d]).powi(2)).sum::<f64>() / n;
                var.sqrt()
            })
            .collect();
        Self { mean, std }
    }

    /// Zero-variance columns map to zero.
    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .zip(self.mean.iter().zip(&self.std))
                    .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

/// Standardizes each column to mean 0 and population std 1. Returns the
/// transformed rows and the statistics for reuse on held-out data.
pub fn z_standardize(train: &[Vec<f64>]) -> (Vec<Vec<f64>>, Standardizer) {
    let stats = Standardizer::fit(train);
    (stats.apply(train), stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub repetition: u32,
    #[serde(default)]
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(seed: u64, repetition: u32) -> Self {
        Self {
            train_fraction: 0.6,
            seed,
            repetition,
            stratified: false,
        }
    }
}

/// Result of [`split`]: the two row subsets and the parent indices they came from.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

const SPLIT_RETRIES: usize = 100;

/// Seeded random train/test split. The first `floor(f * N)` rows of a random
/// permutation form the training set; permutations whose training part misses
/// a class are redrawn.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<Split> {
    let n = dataset.len();
    if n < 5 {
        return Err(Error::input(format!("cannot split {n} instances, need at least 5")));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::input(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let n_train = (spec.train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Split(format!("fraction {} leaves an empty side", spec.train_fraction)));
    }
    let mut rng = rng::stream(spec.seed, &[0x5b1_17, u64::from(spec.repetition)]);
    let labels = dataset.labels();
    for _ in 0..SPLIT_RETRIES {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        if spec.stratified {
            order = stratified_order(&order, labels, dataset.n_classes(), spec.train_fraction, n_train);
        }
        let (train, test) = order.split_at(n_train);
        let mut seen = vec![false; dataset.n_classes()];
        train.iter().for_each(|&i| seen[labels[i]] = true);
        if seen.iter().all(|&s| s) {
            return Ok(Split {
                train: dataset.subset(train),
                test: dataset.subset(test),
                train_indices: train.to_vec(),
                test_indices: test.to_vec(),
            });
        }
    }
    Err(Error::Split(format!(
        "no class-covering split of `{}` after {SPLIT_RETRIES} attempts",
        dataset.name()
    )))
}

/// Reorders a shuffled permutation so that its first `n_train` entries take
/// `max(1, floor(f * n_c))` instances of every class, topped up from the rest.
fn stratified_order(
    shuffled: &[usize],
    labels: &[usize],
    n_classes: usize,
    fraction: f64,
    n_train: usize,
) -> Vec<usize> {
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    shuffled.iter().for_each(|&i| per_class[labels[i]].push(i));
    let mut taken = vec![false; labels.len()];
    let mut front = Vec::with_capacity(labels.len());
    for members in &per_class {
        let quota = ((fraction * members.len() as f64).floor() as usize).max(1);
        for &i in members.iter().take(quota) {
            if front.len() < n_train {
                taken[i] = true;
                front.push(i);
            }
        }
    }
    front.extend(shuffled.iter().copied().filter(|&i| !taken[i]));
    front
}

/// Isotropic unit-variance Gaussian clusters in 2-D, one per class, with
/// centres evenly spaced on a circle of radius 5. Labels cycle through the
/// classes so counts are balanced to within one.
pub fn synthetic_blobs(n: usize, classes: usize, seed: u64) -> Result<Dataset> {
    if classes == 0 || n < classes {
        return Err(Error::input(format!("need n >= classes >= 1, got n={n}, classes={classes}")));
    }
    let centers = blob_centers(classes);
    let mut rng = rng::stream(seed, &[0xb10b]);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % classes;
        let dx: f64 = StandardNormal.sample(&mut rng);
        let dy: f64 = StandardNormal.sample(&mut rng);
        features.push(vec![centers[y][0] + dx, centers[y][1] + dy]);
        labels.push(y);
    }
    Dataset::new(format!("blobs-n{n}-c{classes}"), features, labels, FeatureKind::Numeric)
}

pub fn blob_centers(classes: usize) -> Vec<[f64; 2]> {
    (0..classes)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / classes as f64;
            [5.0 * angle.cos(), 5.0 * angle.sin()]
        })
        .collect()
}

/// One dataset in a manifest file (a JSON array of these).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub path: PathBuf,
    pub kind: FeatureKind,
    pub n: usize,
    pub d: usize,
    pub c: usize,
}

impl ManifestEntry {
    pub fn load(&self, label: &LabelColumn) -> Result<Dataset> {
        let ds = load_csv(&self.path, self.kind, label)?;
        if ds.len() != self.n || ds.dims() != self.d || ds.n_classes() != self.c {
            return Err(Error::Ingestion {
                path: self.path.clone(),
                message: format!(
                    "shape {}x{} with {} classes does not match manifest ({}x{}, {} classes)",
                    ds.len(),
                    ds.dims(),
                    ds.n_classes(),
                    self.n,
                    self.d,
                    self.c
                ),
            });
        }
        Ok(Dataset {
            name: self.name.clone(),
            ..ds
        })
    }
}

/// Reads a manifest; relative dataset paths are resolved against the
/// manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Ingestion {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut entries: Vec<ManifestEntry> =
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::Ingestion {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    for e in &mut entries {
        if e.path.is_relative() {
            e.path = base.join(&e.path);
        }
    }
    Ok(entries)
}
