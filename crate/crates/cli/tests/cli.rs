use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_al-lab"));
    c.env_remove("AL_LAB_WORKERS");
    c
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/manifest.json")
}

fn run(out: &Path, extra: &[&str]) -> Output {
    run_reps(out, "2", extra)
}

fn run_reps(out: &Path, reps: &str, extra: &[&str]) -> Output {
    bin()
        .args(["run", "--manifest"])
        .arg(manifest())
        .args(["--datasets", "iris", "--strategies", "xpal,rand", "--reps", reps, "--budget", "15", "--out"])
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn run_writes_one_record_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 4);
    let first: serde_json::Value = serde_json::from_str(records.lines().next().unwrap()).unwrap();
    for field in ["dataset", "strategy", "repetition", "seed", "errors"] {
        assert!(first.get(field).is_some(), "{field}");
    }
    assert_eq!(first["errors"].as_array().unwrap().len(), 15);

    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(
        summary.lines().next().unwrap(),
        "dataset,strategy,mean_aulc,std_aulc,mean_rank,p_vs_reference,annotation"
    );
    assert_eq!(summary.lines().count(), 3);
    assert!(dir.path().join("config.json").exists());
    assert!(dir.path().join("curves.csv").exists());
    assert!(!dir.path().join("INCOMPLETE").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(a.path(), &["--workers", "1"]).status.success());
    assert!(bin()
        .env("AL_LAB_WORKERS", "3")
        .args(["run", "--manifest"])
        .arg(manifest())
        .args(["--datasets", "iris", "--strategies", "xpal,rand", "--reps", "2", "--budget", "15", "--out"])
        .arg(b.path())
        .status()
        .unwrap()
        .success());
    for f in ["records.jsonl", "summary.csv", "curves.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_dataset_path_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--datasets", "no/such/file.csv", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/file.csv"));
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--budget", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["--strategies", "alce"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"repetitions": 0}"#).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let body = serde_json::json!({
        "manifest": manifest(),
        "datasets": ["wine"],
        "strategies": [{"kind": "us"}],
        "repetitions": 5,
        "budget": 4,
        "out": dir.path().join("ignored"),
    });
    fs::write(&cfg, body.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--reps", "1", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(out_dir.join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 1);
    assert!(records.contains("\"wine\"") && records.contains("\"us\""));
    let echo: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["repetitions"], 1);
}

#[test]
fn interrupted_runs_resume_from_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &[]).status.success());
    let records = fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    // pretend the run died after one cell, with a recognisable record
    let mut first: serde_json::Value = serde_json::from_str(records.lines().next().unwrap()).unwrap();
    first["errors"] = serde_json::json!(vec![0.5; 15]);
    fs::write(dir.path().join("records.partial.jsonl"), format!("{first}\n{{\"torn")).unwrap();
    fs::write(dir.path().join("INCOMPLETE"), "").unwrap();
    fs::remove_file(dir.path().join("records.jsonl")).unwrap();

    let out = run(dir.path(), &[]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("1 resumed"));
    let resumed = fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(resumed.lines().count(), 4);
    assert!(resumed.lines().next().unwrap().contains("[0.5,0.5"));
    assert!(!dir.path().join("INCOMPLETE").exists());

    // a different configuration starts over
    fs::write(dir.path().join("records.partial.jsonl"), format!("{first}\n")).unwrap();
    fs::write(dir.path().join("INCOMPLETE"), "").unwrap();
    let out = run(dir.path(), &["--seed", "9"]);
    assert!(out.status.success());
    assert!(!String::from_utf8_lossy(&out.stdout).contains("resumed"));
}

#[test]
fn alpha_sweep_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_reps(dir.path(), "5", &["--alpha", "0.001,1", "--reference", "xpal(alpha=0.001)"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 15);
    assert!(records.contains("xpal(alpha=1)"));

    let rep = dir.path().join("rep");
    let out = bin()
        .args(["report", "--records"])
        .arg(dir.path().join("records.jsonl"))
        .args(["--reference", "xpal(alpha=0.001)", "--out"])
        .arg(&rep)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(rep.join("summary.csv")).unwrap(),
        fs::read(dir.path().join("summary.csv")).unwrap()
    );
    let ranks: serde_json::Value = serde_json::from_str(&fs::read_to_string(rep.join("ranks.json")).unwrap()).unwrap();
    assert!(ranks["win_tie_loss"].get("rand").is_some());
    let out = bin().args(["report", "--records", "nowhere.jsonl"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scaling_and_landscape_commands() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    let out = bin()
        .args(["scaling", "--sizes", "60,90", "--classes", "2,3", "--strategies", "xpal,us,rand", "--budget", "2", "--out"])
        .arg(&s)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(s.join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "strategy,n,c,seconds_per_acquisition");
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3);

    let l = dir.path().join("l");
    let out = bin()
        .args(["landscape", "--strategy", "us", "--grid", "7", "--labels", "4", "--mode", "random", "--out"])
        .arg(&l)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = fs::read_to_string(l.join("landscape_grid.csv")).unwrap();
    assert_eq!(grid.lines().next().unwrap(), "x,y,score");
    assert_eq!(grid.lines().count(), 50);
    assert_eq!(fs::read_to_string(l.join("landscape_labeled.csv")).unwrap().lines().count(), 5);

    let out = bin()
        .args(["landscape", "--manifest"])
        .arg(manifest())
        .args(["--dataset", "iris", "--out"])
        .arg(&l)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2-D"));
}
