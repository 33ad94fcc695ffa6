use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_listdtr")).current_dir(dir).args(args).output().expect("spawn listdtr")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn simulated(dir: &Path, n: &str) {
    ok(dir, &["simulate", "--n", n, "--corr", "low", "--seed", "7", "--out", "d.csv"]);
}

#[test]
fn simulate_writes_every_interval_and_is_reproducible() {
    let t = TempDir::new().unwrap();
    simulated(t.path(), "1000");
    let first = std::fs::read(t.path().join("d.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 3000);
    simulated(t.path(), "1000");
    assert_eq!(std::fs::read(t.path().join("d.csv")).unwrap(), first);
    let meta = json(t.path().join("d.meta.json"));
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["n_units"], 1000);
}

#[test]
fn sidecar_records_correlation_level() {
    let t = TempDir::new().unwrap();
    ok(t.path(), &["simulate", "--n", "50", "--corr", "med", "--out", "m.csv"]);
    let meta = json(t.path().join("m.meta.json"));
    assert_eq!(meta["level"], "med");
    assert_eq!(meta["zeta"], 1.0);
    assert_eq!(meta["offset"], 0.31);
}

#[test]
fn fit_writes_one_regime_per_budget_with_even_schedules() {
    let t = TempDir::new().unwrap();
    simulated(t.path(), "1000");
    ok(t.path(), &["--out-dir", "o", "fit", "--data", "d.csv", "--tau", "26,28,30"]);
    let o = t.path().join("o");
    for tau in [26.0, 28.0, 30.0] {
        let r = json(o.join(format!("regime_tau{tau}.json")));
        let sched: Vec<f64> = r["tau"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(sched.len(), 3);
        for s in sched {
            assert!((s - tau / 3.0).abs() < 1e-12);
        }
    }
    let ladder = json(o.join("ladder.json"));
    let labels: Vec<&str> = ladder["entries"].as_array().unwrap().iter().map(|e| e["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["I", "II", "III"]);
}

#[test]
fn fit_is_byte_identical_across_runs() {
    let t = TempDir::new().unwrap();
    simulated(t.path(), "600");
    ok(t.path(), &["--out-dir", "a", "fit", "--data", "d.csv", "--tau", "28"]);
    ok(t.path(), &["--out-dir", "b", "fit", "--data", "d.csv", "--tau", "28"]);
    for f in ["regime_tau28.json", "ladder.json"] {
        assert_eq!(std::fs::read(t.path().join("a").join(f)).unwrap(), std::fs::read(t.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn unconstrained_fit_serializes_unbounded_budget_as_null() {
    let t = TempDir::new().unwrap();
    simulated(t.path(), "500");
    ok(t.path(), &["--out-dir", "o", "fit", "--data", "d.csv", "--tau", "inf", "--eta", "0"]);
    let r = json(t.path().join("o/regime_tauinf.json"));
    assert!(r["tau"].as_array().unwrap().iter().all(Value::is_null));
    assert!(r["feasible"].as_array().unwrap().iter().all(|f| f == true));
    assert!(json(t.path().join("o/ladder.json"))["entries"][0]["tau"].is_null());
}

const TABLE_ONE: &str = r#"{"entries": [
  {"label": "I",   "tau": 26, "mean_effectiveness": 1.35, "mean_cost": 25.98},
  {"label": "II",  "tau": 30, "mean_effectiveness": 1.44, "mean_cost": 29.76},
  {"label": "III", "tau": 34, "mean_effectiveness": 1.54, "mean_cost": 33.93},
  {"label": "IV",  "tau": 38, "mean_effectiveness": 1.64, "mean_cost": 37.86},
  {"label": "V",   "tau": 42, "mean_effectiveness": 1.71, "mean_cost": 41.81},
  {"label": "VI",  "tau": 46, "mean_effectiveness": 1.76, "mean_cost": 45.62},
  {"label": "VII", "tau": 50, "mean_effectiveness": 1.79, "mean_cost": 47.46}
]}"#;

#[test]
fn cea_selects_fourth_rung_of_published_ladder() {
    let t = TempDir::new().unwrap();
    std::fs::write(t.path().join("s.json"), TABLE_ONE).unwrap();
    let stdout = ok(t.path(), &["--out-dir", "o", "cea", "--summaries", "s.json", "--wtp", "50"]);
    assert!(stdout.contains("IV*"));
    let rep = json(t.path().join("o/cea_report.json"));
    assert_eq!(rep["selected_label"], "IV");
    let table = std::fs::read_to_string(t.path().join("o/cea_report.txt")).unwrap();
    assert!(table.starts_with("Regime"));
}

#[test]
fn cea_single_entry_and_zero_wtp() {
    let t = TempDir::new().unwrap();
    std::fs::write(t.path().join("s.json"), TABLE_ONE).unwrap();
    ok(t.path(), &["--out-dir", "o", "cea", "--summaries", "s.json", "--wtp", "0"]);
    assert_eq!(json(t.path().join("o/cea_report.json"))["selected_label"], "I");

    std::fs::write(
        t.path().join("one.json"),
        r#"{"entries": [{"label": "I", "tau": 26, "mean_effectiveness": 1.3, "mean_cost": 25}]}"#,
    )
    .unwrap();
    ok(t.path(), &["--out-dir", "p", "cea", "--summaries", "one.json", "--wtp", "50"]);
    assert_eq!(json(t.path().join("p/cea_report.json"))["selected_index"], 0);
}

#[test]
fn cea_skips_infeasible_rungs() {
    let t = TempDir::new().unwrap();
    std::fs::write(
        t.path().join("s.json"),
        r#"{"entries": [
          {"label": "I", "tau": 26, "mean_effectiveness": 1.3, "mean_cost": 25},
          {"label": "II", "tau": 28, "feasible": false, "mean_effectiveness": 2.0, "mean_cost": 26}
        ]}"#,
    )
    .unwrap();
    ok(t.path(), &["--out-dir", "o", "cea", "--summaries", "s.json", "--wtp", "50"]);
    let rep = json(t.path().join("o/cea_report.json"));
    assert_eq!(rep["steps"].as_array().unwrap().len(), 1);
}

#[test]
fn evaluate_ladder_reports_standard_errors() {
    let t = TempDir::new().unwrap();
    simulated(t.path(), "500");
    ok(t.path(), &["--out-dir", "o", "fit", "--data", "d.csv", "--tau", "26,30"]);
    ok(t.path(), &["--out-dir", "o", "evaluate", "--ladder", "o/ladder.json", "--mc", "2000"]);
    let mc = json(t.path().join("o/ladder_mc.json"));
    for e in mc["entries"].as_array().unwrap() {
        assert_eq!(e["source"], "MONTE_CARLO");
        assert!(e["se_cost"].as_f64().unwrap() > 0.0);
    }
    ok(t.path(), &["--out-dir", "o", "cea", "--summaries", "o/ladder_mc.json", "--wtp", "50"]);
}

#[test]
fn reproduce_single_replication_has_no_spread() {
    let t = TempDir::new().unwrap();
    let stdout = ok(t.path(), &["--out-dir", "o", "reproduce", "--tau", "26", "--n", "300", "--reps", "1", "--mc", "2000"]);
    assert!(stdout.contains("SE.Cost"));
    let rep = json(t.path().join("o/reproduce.json"));
    let cells = rep["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0]["replications"], 1);
    assert!(cells[0]["se_mc_cost"].is_null());
    assert!(cells[0]["reference"].is_null());
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let t = TempDir::new().unwrap();
    std::fs::write(t.path().join("c.json"), r#"{"seed": 11, "n": 40, "corr": "high", "out_dir": "cfg"}"#).unwrap();
    ok(t.path(), &["--config", "c.json", "simulate"]);
    let meta = json(t.path().join("cfg/data.meta.json"));
    assert_eq!((meta["seed"].as_u64(), meta["n_units"].as_u64(), meta["level"].as_str()), (Some(11), Some(40), Some("high")));
    ok(t.path(), &["--config", "c.json", "--seed", "12", "simulate", "--n", "30"]);
    let meta = json(t.path().join("cfg/data.meta.json"));
    assert_eq!((meta["seed"].as_u64(), meta["n_units"].as_u64()), (Some(12), Some(30)));
}

#[test]
fn exit_codes() {
    let t = TempDir::new().unwrap();
    let code = |args: &[&str]| run(t.path(), args).status.code();
    assert_eq!(code(&["fit", "--data", "missing.csv"]), Some(2));
    std::fs::write(t.path().join("bad.json"), r#"{"sed": 1}"#).unwrap();
    assert_eq!(code(&["--config", "bad.json", "simulate"]), Some(2));
    assert_eq!(code(&["simulate", "--corr", "extreme", "--out", "x.csv"]), Some(2));

    simulated(t.path(), "300");
    assert_eq!(code(&["--out-dir", "o", "fit", "--data", "d.csv", "--tau", "30,26"]), Some(2));
    let mut text = std::fs::read_to_string(t.path().join("d.csv")).unwrap();
    text.push_str("0,1,abc,0,0,1,1,1\n");
    std::fs::write(t.path().join("bad.csv"), text).unwrap();
    let out = run(t.path(), &["--out-dir", "o", "fit", "--data", "bad.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    // A budget far below the never-treat cost cannot be met.
    assert_eq!(code(&["--out-dir", "lax", "fit", "--data", "d.csv", "--tau", "5"]), Some(0));
    assert_eq!(code(&["--strict", "--out-dir", "s", "fit", "--data", "d.csv", "--tau", "5"]), Some(4));
    assert!(t.path().join("s/regime_tau5.json").exists());
}
