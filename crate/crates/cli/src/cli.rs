use std::path::PathBuf;

use al_lab::data::{synthetic_blobs, LabelColumn};
use al_lab::strategies::{StrategyConfig, StrategyKind};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_f64_list, parse_strategy_list, parse_usize_list, RunConfig, WORKERS_ENV};
use crate::error::{CliError, Result};
use crate::landscape::{cmd_landscape, LabeledMode, LandscapeConfig};
use crate::report::cmd_report;
use crate::run::cmd_run;
use crate::scaling::{cmd_scaling, ScalingConfig};

#[derive(Debug, Parser)]
#[command(name = "al-lab", version, about = "Pool-based active learning benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every dataset x strategy x repetition and write records and summaries.
    Run(RunArgs),
    /// Score a grid over a 2-D dataset with one strategy.
    Landscape(LandscapeArgs),
    /// Time strategies on synthetic blobs of growing size.
    Scaling(ScalingArgs),
    /// Re-summarize an existing records file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated manifest names or CSV paths.
    #[arg(long)]
    pub datasets: Option<String>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Comma-separated strategy names (xpal, pal, eer, us, qbc, rand, greedy-all).
    #[arg(long)]
    pub strategies: Option<String>,
    #[arg(long)]
    pub reps: Option<u32>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Prior for xPAL and EER; several comma-separated values sweep xPAL.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep class proportions in the train/test splits.
    #[arg(long)]
    pub stratified: bool,
    /// Label column name, or its zero-based index.
    #[arg(long)]
    pub label_column: Option<String>,
    /// Strategy the significance tests compare against.
    #[arg(long)]
    pub reference: Option<String>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    /// Manifest name or CSV path of a 2-D numeric dataset; synthetic blobs when absent.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, default_value = crate::config::DEFAULT_MANIFEST)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "xpal")]
    pub strategy: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = LabeledMode::StrategyChosen)]
    pub mode: LabeledMode,
    #[arg(long, default_value_t = 8)]
    pub labels: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = 60)]
    pub grid: usize,
    /// Size of the synthetic dataset when no dataset is given.
    #[arg(long, default_value_t = 100)]
    pub blobs: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "landscape")]
    pub out: PathBuf,
    #[arg(long)]
    pub label_column: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, default_value = "500,1000,1500,2000,2500")]
    pub sizes: String,
    #[arg(long, default_value = "2,4,6")]
    pub classes: String,
    #[arg(long, default_value = "xpal,pal,eer,us,qbc,rand")]
    pub strategies: String,
    /// Acquisitions timed per configuration.
    #[arg(long, default_value_t = 5)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "scaling")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = "results/records.jsonl")]
    pub records: PathBuf,
    #[arg(long, default_value = "xpal")]
    pub reference: String,
    /// Output directory; defaults to the records file's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    /// The config file (or defaults) with every given flag applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(d) = &self.datasets {
            cfg.datasets = d.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
        }
        if let Some(m) = &self.manifest {
            cfg.manifest = m.clone();
        }
        if let Some(s) = &self.strategies {
            cfg.strategies = parse_strategy_list(s)?;
        }
        if let Some(r) = self.reps {
            cfg.repetitions = r;
        }
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        if let Some(a) = &self.alpha {
            let values = parse_f64_list(a)?;
            match values.as_slice() {
                [] => return Err(CliError::config("--alpha needs at least one value")),
                [single] => {
                    for s in &mut cfg.strategies {
                        match s.kind {
                            StrategyKind::Xpal => s.alpha = *single,
                            StrategyKind::Eer => s.epsilon = *single,
                            _ => {}
                        }
                    }
                    cfg.alpha_sweep = None;
                }
                many => cfg.alpha_sweep = Some(many.to_vec()),
            }
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if self.stratified {
            cfg.stratified = true;
        }
        if let Some(l) = &self.label_column {
            cfg.label_column = l.parse().unwrap_or_else(|e| match e {});
        }
        if let Some(r) = &self.reference {
            cfg.reference = r.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let out = cmd_run(&cfg)?;
            Ok(format!(
                "wrote {} records to {}{}",
                out.records.len(),
                out.records_path.display(),
                if out.resumed > 0 {
                    format!(" ({} resumed)", out.resumed)
                } else {
                    String::new()
                }
            ))
        }
        Command::Landscape(args) => {
            let mut strategy = StrategyConfig::new(args.strategy.parse()?);
            if let Some(a) = args.alpha {
                strategy.alpha = a;
                strategy.epsilon = a;
            }
            let dataset = match &args.dataset {
                Some(d) => {
                    let cfg = RunConfig {
                        manifest: args.manifest.clone(),
                        datasets: vec![d.clone()],
                        label_column: match &args.label_column {
                            Some(l) => l.parse().unwrap_or_else(|e| match e {}),
                            None => LabelColumn::default(),
                        },
                        ..RunConfig::default()
                    };
                    cfg.load_datasets()?.remove(0)
                }
                None => synthetic_blobs(args.blobs, args.classes, args.seed)?,
            };
            let config = LandscapeConfig {
                strategy,
                mode: args.mode,
                n_labels: args.labels,
                resolution: args.grid,
                seed: args.seed,
                out: args.out.clone(),
            };
            let result = cmd_landscape(&dataset, &config)?;
            Ok(format!("wrote {} grid scores to {}", result.grid.len(), args.out.display()))
        }
        Command::Scaling(args) => {
            let config = ScalingConfig {
                sizes: parse_usize_list(&args.sizes)?,
                class_counts: parse_usize_list(&args.classes)?,
                strategies: parse_strategy_list(&args.strategies)?,
                budget: args.budget,
                seed: args.seed,
            };
            let result = cmd_scaling(&config, &args.out)?;
            Ok(format!("wrote {} timings to {}", result.rows.len(), args.out.display()))
        }
        Command::Report(args) => {
            let out = args.out.clone().unwrap_or_else(|| {
                args.records
                    .parent()
                    .map(|p| p.to_path_buf())
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            let summary = cmd_report(&args.records, &args.reference, &out)?;
            Ok(format!("summarized {} rows into {}", summary.rows.len(), out.display()))
        }
    }
}
