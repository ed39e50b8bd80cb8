//! End-to-end behaviour of the `mfuq` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mfuq(args: &[&str], cache: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mfuq"));
    c.args(args).env("RUST_LOG", "warn");
    match cache {
        Some(p) => c.env("MFUQ_CACHE", p),
        None => c.env_remove("MFUQ_CACHE"),
    };
    c.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"{
  "schema_version": 1,
  "model": {"kind": "builtin", "name": "exp-cos"},
  "method": "misc",
  "budget": 200,
  "distribution": {"samples": 500},
  "surface_resolution": 5
}"#;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn both_methods_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bench.json",
        r#"{"schema_version": 1, "model": {"kind": "builtin", "name": "exp-cos"},
            "method": "both", "budget": 2000, "distribution": {"samples": 1000}, "surface_resolution": 9}"#,
    );
    let out = dir.path().join("out");
    let o = mfuq(&["run", "--config", s(&cfg), "--out", s(&out)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    for m in ["misc", "srbf"] {
        let conv = std::fs::read_to_string(out.join(m).join("convergence.csv")).unwrap();
        assert!(conv.starts_with("iteration,cost,mean,std\n"), "{m}");
        for (f, header) in [
            ("histogram.csv", "lower,upper,count,density"),
            ("kde.csv", "x,density"),
            ("surface.csv", "y1,y2,value"),
            ("counts.csv", "fidelity,evaluations"),
        ] {
            let text = std::fs::read_to_string(out.join(m).join(f)).unwrap();
            assert_eq!(text.lines().next(), Some(header), "{m}/{f}");
        }
        assert!(out.join(m).join("log.jsonl").exists());
    }
    let unc = std::fs::read_to_string(out.join("srbf/uncertainty.csv")).unwrap();
    assert!(unc.starts_with("iteration,cost,max_uncertainty,relative\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    let methods = summary["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 2);
    for m in methods {
        assert_eq!(m["final_snapshot"]["cost"], m["ledger"]["cost_spent"]);
    }
    assert!(!out.join("misc/convergence.svg").exists());
}

#[test]
fn misc_budget_one_evaluates_the_root_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL);
    let out = dir.path().join("out");
    let o = mfuq(&["run", "--config", s(&cfg), "--budget", "1", "--out", s(&out)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let conv = std::fs::read_to_string(out.join("misc/convergence.csv")).unwrap();
    let rows: Vec<&str> = conv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("0,1.0,"), "{}", rows[0]);
    let counts = std::fs::read_to_string(out.join("misc/counts.csv")).unwrap();
    assert_eq!(counts, "fidelity,evaluations\n(1),1\n");
}

#[test]
fn validation_errors_exit_nonzero_with_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"schema_version": 1, "model": {"kind": "builtin", "name": "exp-cos", "fidelities": 0}, "budget": 10}"#,
    );
    let o = mfuq(&["run", "--config", s(&cfg)], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("model.fidelities"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "syntax.json", "{\n  \"schema_version\": 1,\n  \"budget\": ,\n}");
    let o = mfuq(&["run", "--config", s(&cfg)], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "c.json", SMALL);
    let o = mfuq(&["run", "--config", s(&cfg), "--budget=-5"], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
}

#[test]
fn cache_location_follows_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL);
    let out = dir.path().join("out");
    let cache = dir.path().join("elsewhere/evals.jsonl");
    let o = mfuq(&["run", "--config", s(&cfg), "--out", s(&out)], Some(&cache));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(cache.exists());
    assert!(!out.join("cache.jsonl").exists());
    let first = std::fs::read_to_string(out.join("summary.json")).unwrap();
    // replaying from the cache charges and reports the same
    let o = mfuq(&["run", "--config", s(&cfg), "--out", s(&out)], Some(&cache));
    assert!(o.status.success());
    assert_eq!(first, std::fs::read_to_string(out.join("summary.json")).unwrap());
}

#[test]
fn compare_tables_and_schema_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(mfuq(&["run", "--config", s(&cfg), "--out", s(&a)], None).status.success());
    assert!(mfuq(&["run", "--config", s(&cfg), "--out", s(&b), "--seed", "5", "--svg"], None)
        .status
        .success());
    assert!(b.join("misc/convergence.svg").exists());

    let sa = a.join("summary.json");
    let sb = b.join("summary.json");
    let o = mfuq(&["compare", s(&sa)], None);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1 + 2);

    let o = mfuq(&["compare", s(&sa), s(&sb), "--iteration", "3", "--json"], None);
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["snapshot"], "intermediate");
    assert_eq!(rows[0]["iteration"], 3);
    assert_eq!(rows[1]["snapshot"], "final");

    let text = std::fs::read_to_string(&sb).unwrap().replace("\"schema_version\": 1", "\"schema_version\": 9");
    let bad = write_config(dir.path(), "old-summary.json", &text);
    let o = mfuq(&["compare", s(&sa), s(&bad)], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("old-summary.json"), "{}", stderr(&o));
}
