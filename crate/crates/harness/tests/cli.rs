use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn driftevo(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_driftevo"));
    cmd.args(args).env_remove("DRIFTEVO_OUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("DRIFTEVO_OUT_DIR", d);
    }
    cmd.output().expect("spawn driftevo")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn run_writes_csv_and_summary_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = driftevo(
        &["run", "--set", "family=monotone-conj", "--set", "n=6", "--set", "trials=3", "--set", "horizon=40", "--seed", "5"],
        Some(dir.path()),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "trial,generation,perf_exact,selection_class,target_id,rep_id");
    assert_eq!(lines.count(), 3 * 41);
    let summary = read_json(&dir.path().join("run.summary.json"));
    assert_eq!(summary["config"]["n"], 6);
    assert_eq!(summary["config"]["seed"], 5);
    assert_eq!(summary["trials"].as_array().unwrap().len(), 3);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(&cfg, r#"{"family": "hyperplane-rotation", "n": 3, "epsilon": 0.4, "trials": 2, "horizon": 10}"#).unwrap();
    let out = dir.path().join("nested/r.csv");
    let o = driftevo(
        &["run", "--config", cfg.to_str().unwrap(), "--set", "n=4", "--set", "drift=random-walk", "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&dir.path().join("nested/r.summary.json"));
    assert_eq!(summary["config"]["n"], 4);
    assert_eq!(summary["config"]["drift"], "random-walk");
    assert_eq!(summary["config"]["epsilon"], 0.4);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = driftevo(
            &["run", "--set", "family=general-conj", "--set", "n=7", "--set", "trials=9", "--set", "horizon=60",
              "--set", "mode=noise-uniform", "--seed", "11", "--threads", threads, "--out", out.to_str().unwrap()],
            None,
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(&out).unwrap(), std::fs::read(out.with_extension("summary.json")).unwrap())
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "3"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--set", "family=monotone-conj", "--set", "colour=blue"],
        vec!["run", "--set", "family=monotone-conj", "--set", "epsilon=1.5"],
        vec!["run", "--set", "family=monotone-conj", "--set", "n=10", "--set", "drift=long-swap"],
        vec!["run", "--set", "family=monotone-conj", "--set", "drift=scripted"],
        vec!["verify", "--set", "family=csq-reduction", "--set", "n=4", "--set", "epsilon=0.3"],
        vec!["sweep", "--set", "family=monotone-conj", "--axis", "sideways", "--values", "1"],
    ] {
        let o = driftevo(&args, Some(dir.path()));
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = driftevo(
        &["verify", "--set", "family=hyperplane-rotation", "--set", "n=3", "--set", "epsilon=0.4", "--set", "cases=100"],
        Some(dir.path()),
    );
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let report = read_json(&dir.path().join("verify.json"));
    assert_eq!(report["total_violations"], 0);

    // long targets leave gains below eps^2/9 just above 1 - eps
    let bad = driftevo(
        &["verify", "--set", "family=monotone-conj", "--set", "n=16", "--set", "epsilon=0.1", "--set", "cases=400"],
        Some(dir.path()),
    );
    assert_eq!(code(&bad), 1);
    let report = read_json(&dir.path().join("verify.json"));
    assert!(report["total_violations"].as_u64().unwrap() > 0);
    assert_eq!(report["cells"][0]["violations_below_accuracy"], 0);
}

#[test]
fn scripted_schedule_is_checked_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    // one-literal swaps of a 12-literal target over 13 variables
    std::fs::write(&good, "# swaps\n1,2,3,4,5,6,7,8,9,10,11,12\n1,2,3,4,5,6,7,8,9,10,11,13\n2,3,4,5,6,7,8,9,10,11,12,13\n").unwrap();
    let out = dir.path().join("s.csv");
    let base = ["run", "--set", "family=monotone-conj", "--set", "n=13", "--set", "trials=2", "--set", "horizon=5",
                "--set", "drift=scripted", "--out", out.to_str().unwrap()];
    let mut args: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    args.extend(["--set".into(), format!("schedule_file={}", good.display())]);
    let o = driftevo(&args.iter().map(String::as_str).collect::<Vec<_>>(), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let target_ids: Vec<&str> = csv.lines().skip(2).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(target_ids[..6], ["0", "1", "2", "2", "2", "2"]);

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1,2,3,4,5,6,7,8,9,10,11,12\n1,2\n").unwrap();
    args.pop();
    args.push(format!("schedule_file={}", bad.display()));
    let o = driftevo(&args.iter().map(String::as_str).collect::<Vec<_>>(), None);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = driftevo(
        &["sweep", "--set", "family=hyperplane-rotation", "--set", "n=3", "--set", "epsilon=0.4", "--set", "trials=2",
          "--set", "horizon=30", "--set", "drift=steady-rotation", "--axis", "delta-multiplier", "--values", "0,1,4"],
        Some(dir.path()),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 2 + 3);
    let cells = read_json(&dir.path().join("sweep.summary.json"));
    assert_eq!(cells.as_array().unwrap().len(), 3);
}
