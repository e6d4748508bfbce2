use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use al_lab::harness::{summarize, LearningCurveRecord, Summary};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::run::read_records;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const RANKS_FILE: &str = "ranks.json";

#[derive(Serialize)]
struct SummaryLine<'a> {
    dataset: &'a str,
    strategy: &'a str,
    mean_aulc: f64,
    std_aulc: f64,
    mean_rank: f64,
    p_vs_reference: Option<f64>,
    annotation: &'a str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub dataset: String,
    pub strategy: String,
    /// Number of acquired labels.
    pub step: usize,
    pub mean_error: f64,
    pub std_error: f64,
    /// Repetitions whose curve reaches this step.
    pub count: usize,
}

/// Mean learning curve per dataset and strategy.
pub fn mean_curves(records: &[LearningCurveRecord]) -> Vec<CurvePoint> {
    let mut groups: BTreeMap<(&str, &str), Vec<&[f64]>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.dataset, &r.strategy)).or_default().push(&r.errors);
    }
    let mut out = Vec::new();
    for ((dataset, strategy), curves) in groups {
        let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
        for step in 0..len {
            let vals: Vec<f64> = curves.iter().filter_map(|c| c.get(step).copied()).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            out.push(CurvePoint {
                dataset: dataset.to_string(),
                strategy: strategy.to_string(),
                step: step + 1,
                mean_error: mean,
                std_error: var.sqrt(),
                count: vals.len(),
            });
        }
    }
    out
}

/// Writes `summary.csv`, `curves.csv` and `ranks.json` into `out`.
pub fn write_reports(records: &[LearningCurveRecord], reference: &str, out: &Path) -> Result<Summary> {
    let summary = summarize(records, reference)?;
    let path = out.join(SUMMARY_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    for r in &summary.rows {
        w.serialize(SummaryLine {
            dataset: &r.dataset,
            strategy: &r.strategy,
            mean_aulc: r.mean_aulc,
            std_aulc: r.std_aulc,
            mean_rank: r.mean_rank,
            p_vs_reference: r.p_vs_reference,
            annotation: &r.annotation,
        })?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let path = out.join(CURVES_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    for p in mean_curves(records) {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let path = out.join(RANKS_FILE);
    fs::write(&path, serde_json::to_string_pretty(&summary.ranks)?).map_err(|e| CliError::io(&path, e))?;
    Ok(summary)
}

/// Re-summarizes an existing records file.
pub fn cmd_report(records: &Path, reference: &str, out: &Path) -> Result<Summary> {
    let records = read_records(records)?;
    if records.is_empty() {
        return Err(CliError::config("records file is empty"));
    }
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_reports(&records, reference, out)
}
