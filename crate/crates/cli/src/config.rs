use std::fs;
use std::path::{Path, PathBuf};

use al_lab::data::{load_csv, load_manifest, Dataset, FeatureKind, LabelColumn};
use al_lab::strategies::{StrategyConfig, StrategyKind};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_REPETITIONS: u32 = 100;
pub const DEFAULT_BUDGET: usize = 200;
pub const DEFAULT_MANIFEST: &str = "data/manifest.json";
pub const WORKERS_ENV: &str = "AL_LAB_WORKERS";

fn default_manifest() -> PathBuf {
    PathBuf::from(DEFAULT_MANIFEST)
}

fn default_strategies() -> Vec<StrategyConfig> {
    [StrategyKind::Xpal, StrategyKind::Pal, StrategyKind::Us, StrategyKind::Qbc, StrategyKind::Eer, StrategyKind::Rand]
        .into_iter()
        .map(StrategyConfig::new)
        .collect()
}

fn default_repetitions() -> u32 {
    DEFAULT_REPETITIONS
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn default_reference() -> String {
    "xpal".into()
}

/// Everything `run` needs. Loaded from a JSON file, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_manifest")]
    pub manifest: PathBuf,
    /// Manifest names or CSV paths; empty selects the whole manifest.
    #[serde(default)]
    pub datasets: Vec<String>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<StrategyConfig>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// When set, every xPAL entry is replaced by one entry per prior value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; falls back to `AL_LAB_WORKERS`, then to all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub stratified: bool,
    #[serde(default)]
    pub label_column: LabelColumn,
    /// Strategy label the significance tests compare against.
    #[serde(default = "default_reference")]
    pub reference: String,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.6
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(CliError::MissingPath(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Strategy list after expanding the prior sweep.
    pub fn expanded_strategies(&self) -> Vec<StrategyConfig> {
        let Some(sweep) = &self.alpha_sweep else {
            return self.strategies.clone();
        };
        self.strategies
            .iter()
            .flat_map(|s| match s.kind {
                StrategyKind::Xpal => sweep
                    .iter()
                    .map(|&alpha| StrategyConfig {
                        alpha,
                        name: Some(format!("xpal(alpha={alpha})")),
                        ..s.clone()
                    })
                    .collect(),
                _ => vec![s.clone()],
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(CliError::config("repetitions must be at least 1"));
        }
        if self.budget == 0 {
            return Err(CliError::config("budget must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(CliError::config("workers must be at least 1"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CliError::config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        let strategies = self.expanded_strategies();
        if strategies.is_empty() {
            return Err(CliError::config("at least one strategy is required"));
        }
        let mut labels: Vec<String> = strategies.iter().map(StrategyConfig::label).collect();
        for s in &strategies {
            s.validate()?;
        }
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::config(format!("strategy `{}` is listed twice", w[0])));
        }
        Ok(())
    }

    /// Thread count: the config value, else the environment, else all cores.
    pub fn resolved_workers(&self) -> Result<usize> {
        if let Some(w) = self.workers {
            return Ok(w);
        }
        match std::env::var(WORKERS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(0) | Err(_) => Err(CliError::config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
                Ok(w) => Ok(w),
            },
            Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    /// Loads the selected datasets in the order given (manifest order when
    /// none are selected).
    pub fn load_datasets(&self) -> Result<Vec<Dataset>> {
        let from_path = |spec: &str| -> Result<Dataset> {
            let path = Path::new(spec);
            if !path.exists() {
                return Err(CliError::MissingPath(path.to_path_buf()));
            }
            let name = path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
            let ds = load_csv(path, FeatureKind::Numeric, &self.label_column)?;
            Ok(ds.with_name(name))
        };
        let needs_manifest = self.datasets.is_empty() || self.datasets.iter().any(|d| !is_path(d));
        let manifest = if needs_manifest {
            if !self.manifest.exists() {
                return Err(CliError::MissingPath(self.manifest.clone()));
            }
            load_manifest(&self.manifest)?
        } else {
            Vec::new()
        };
        let from_manifest = |name: &str| -> Result<Dataset> {
            let entry = manifest
                .iter()
                .find(|e| e.name == name)
                .ok_or_else(|| CliError::config(format!("dataset `{name}` is not in {}", self.manifest.display())))?;
            if !entry.path.exists() {
                return Err(CliError::MissingPath(entry.path.clone()));
            }
            Ok(entry.load(&self.label_column)?)
        };
        if self.datasets.is_empty() {
            return manifest.iter().map(|e| from_manifest(&e.name)).collect();
        }
        self.datasets
            .iter()
            .map(|d| if is_path(d) { from_path(d) } else { from_manifest(d) })
            .collect()
    }
}

fn is_path(spec: &str) -> bool {
    spec.contains('/') || spec.contains('\\') || spec.ends_with(".csv")
}

/// Parses `xpal,rand,us` into default configurations.
pub fn parse_strategy_list(list: &str) -> Result<Vec<StrategyConfig>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<StrategyKind>().map(StrategyConfig::new).map_err(CliError::from))
        .collect()
}

pub fn parse_f64_list(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("`{s}` is not a number")))
        })
        .collect()
}

pub fn parse_usize_list(list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::config(format!("`{s}` is not a positive integer")))
        })
        .collect()
}
