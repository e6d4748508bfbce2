use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use al_lab::data::{Dataset, SplitSpec};
use al_lab::harness::{run_prepared, LearningCurveRecord, PreparedSplit};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::write_reports;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const PARTIAL_FILE: &str = "records.partial.jsonl";
pub const MARKER_FILE: &str = "INCOMPLETE";
pub const CONFIG_FILE: &str = "config.json";

/// Where `run` wrote its results.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<LearningCurveRecord>,
    pub records_path: PathBuf,
    /// Cells taken over from an interrupted earlier run.
    pub resumed: usize,
}

type CellKey = (String, String, u32);

fn key(r: &LearningCurveRecord) -> CellKey {
    (r.dataset.clone(), r.strategy.clone(), r.repetition)
}

/// Runs every dataset x strategy x repetition cell and writes records,
/// summaries and curves into `config.out`.
///
/// While running, finished records are appended to a partial file next to an
/// `INCOMPLETE` marker. A rerun with the same configuration picks up the
/// finished cells; the marker and partial file are removed on success.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let workers = config.resolved_workers()?;
    let datasets = config.load_datasets()?;
    let out = &config.out;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    // the worker count never changes results, so it is left out of the echo
    let echo = RunConfig {
        workers: None,
        ..config.clone()
    };
    let config_json = serde_json::to_string_pretty(&echo)?;
    let done = previous_cells(out, &config_json)?;
    let resumed = done.len();
    write_file(&out.join(CONFIG_FILE), &config_json)?;
    write_file(&out.join(MARKER_FILE), "run in progress or interrupted\n")?;

    let partial_path = out.join(PARTIAL_FILE);
    let partial = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&partial_path)
        .map_err(|e| CliError::io(&partial_path, e))?;
    let sink = Mutex::new(BufWriter::new(partial));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("cannot start {workers} workers: {e}")))?;
    let jobs: Vec<(usize, u32)> = (0..datasets.len())
        .flat_map(|d| (0..config.repetitions).map(move |r| (d, r)))
        .collect();
    let fresh: Vec<Vec<LearningCurveRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, rep)| run_cell_group(config, &datasets[d], rep, &done, &sink))
            .collect::<Result<_>>()
    })?;
    sink.into_inner()
        .map_err(|_| CliError::config("result sink poisoned"))?
        .flush()
        .map_err(|e| CliError::io(&partial_path, e))?;

    let mut by_key = done;
    for r in fresh.into_iter().flatten() {
        by_key.insert(key(&r), r);
    }
    let records = canonical_order(config, &datasets, by_key)?;
    let records_path = out.join(RECORDS_FILE);
    write_records(&records_path, &records)?;
    write_reports(&records, &config.reference, out)?;
    for f in [PARTIAL_FILE, MARKER_FILE] {
        let p = out.join(f);
        fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
    }
    Ok(RunOutput {
        records,
        records_path,
        resumed,
    })
}

/// One split, all strategies. Cells already present in `done` are skipped.
fn run_cell_group(
    config: &RunConfig,
    dataset: &Dataset,
    repetition: u32,
    done: &HashMap<CellKey, LearningCurveRecord>,
    sink: &Mutex<BufWriter<File>>,
) -> Result<Vec<LearningCurveRecord>> {
    let strategies = config.expanded_strategies();
    let todo: Vec<_> = strategies
        .iter()
        .filter(|s| !done.contains_key(&(dataset.name().to_string(), s.label(), repetition)))
        .collect();
    if todo.is_empty() {
        return Ok(Vec::new());
    }
    let spec = SplitSpec {
        train_fraction: config.train_fraction,
        stratified: config.stratified,
        ..SplitSpec::new(config.seed, repetition)
    };
    let prepared = PreparedSplit::new(dataset, &spec)?;
    let mut records = Vec::with_capacity(todo.len());
    for s in todo {
        let trace = run_prepared(&prepared, dataset.name(), s, &spec, config.budget)?;
        let line = serde_json::to_string(&trace.record)?;
        {
            let mut w = sink.lock().map_err(|_| CliError::config("result sink poisoned"))?;
            writeln!(w, "{line}").and_then(|_| w.flush()).map_err(|e| CliError::io(PARTIAL_FILE, e))?;
        }
        records.push(trace.record);
    }
    Ok(records)
}

/// Records of an interrupted run with an identical configuration.
fn previous_cells(out: &Path, config_json: &str) -> Result<HashMap<CellKey, LearningCurveRecord>> {
    let marker = out.join(MARKER_FILE);
    let partial = out.join(PARTIAL_FILE);
    let same_config = fs::read_to_string(out.join(CONFIG_FILE)).is_ok_and(|c| c == config_json);
    let mut done = HashMap::new();
    if marker.exists() && partial.exists() && same_config {
        let file = File::open(&partial).map_err(|e| CliError::io(&partial, e))?;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| CliError::io(&partial, e))?;
            // a torn last line from a crash is simply recomputed
            if let Ok(r) = serde_json::from_str::<LearningCurveRecord>(&line) {
                done.insert(key(&r), r);
            }
        }
    } else if partial.exists() {
        fs::remove_file(&partial).map_err(|e| CliError::io(&partial, e))?;
    }
    Ok(done)
}

/// Dataset order of the config, then strategy order, then repetition.
fn canonical_order(
    config: &RunConfig,
    datasets: &[Dataset],
    mut by_key: HashMap<CellKey, LearningCurveRecord>,
) -> Result<Vec<LearningCurveRecord>> {
    let strategies = config.expanded_strategies();
    let mut out = Vec::with_capacity(by_key.len());
    for d in datasets {
        for s in &strategies {
            for rep in 0..config.repetitions {
                let k = (d.name().to_string(), s.label(), rep);
                let r = by_key
                    .remove(&k)
                    .ok_or_else(|| CliError::config(format!("missing result for {k:?}")))?;
                out.push(r);
            }
        }
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[LearningCurveRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<LearningCurveRecord>> {
    if !path.exists() {
        return Err(CliError::MissingPath(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line.map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&line)
                .map_err(|e| CliError::config(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
