//! The request/reply file protocol against small Python solvers.

use std::path::Path;
use std::sync::Arc;

use mfuq::model::{CostModel, Evaluator, ExternalModel, ModelSpec};
use mfuq::{Error, MultiIndex, ParamDomain};

const SOLVER: &str = r#"
import json, sys
req = json.load(open(sys.argv[1]))
value = sum(req["params"]) * req["fidelity"][0]
reply = {"id": req["id"], "value": value}
if MODE == "cost":
    reply["cost"] = 100.0
if MODE == "badid":
    reply["id"] = "nope"
if MODE == "fail":
    sys.stderr.write("diverged\n")
    sys.exit(3)
if MODE != "noreply":
    json.dump(reply, open(sys.argv[2], "w"))
import os
with open(os.path.join(os.path.dirname(sys.argv[0]), "last_request.json"), "w") as f:
    f.write(open(sys.argv[1]).read())
"#;

fn solver(dir: &Path, mode: &str) -> Vec<String> {
    let path = dir.join(format!("solver_{mode}.py"));
    std::fs::write(&path, format!("MODE = {mode:?}\n{SOLVER}")).unwrap();
    vec!["python3".into(), path.display().to_string()]
}

fn spec() -> ModelSpec {
    ModelSpec {
        name: "py".into(),
        domain: ParamDomain::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap(),
        fidelity_caps: vec![3],
        cost: CostModel::Table {
            costs: vec![1.0, 5.0, 25.0],
        },
    }
}

fn evaluator(dir: &Path, mode: &str) -> Evaluator {
    let model = ExternalModel::new(spec(), &solver(dir, mode))
        .unwrap()
        .with_scratch_dir(dir);
    Evaluator::new(Arc::new(model))
}

fn alpha(a: u32) -> MultiIndex {
    MultiIndex::new(vec![a]).unwrap()
}

#[test]
fn value_and_cost_model_when_cost_missing() {
    let dir = tempfile::tempdir().unwrap();
    let ev = evaluator(dir.path(), "plain");
    let r = ev.evaluate(&alpha(2), &[1.5, 0.25]).unwrap();
    assert_eq!(r.value, 3.5);
    assert_eq!(r.cost, 5.0);
    // cached: no second charge
    ev.evaluate(&alpha(2), &[1.5, 0.25]).unwrap();
    assert_eq!(ev.cost_spent(), 5.0);
    assert_eq!(ev.ledger().evaluations, 1);
}

#[test]
fn reported_cost_overrides_cost_model() {
    let dir = tempfile::tempdir().unwrap();
    let ev = evaluator(dir.path(), "cost");
    let r = ev.evaluate(&alpha(1), &[1.0, 0.0]).unwrap();
    assert_eq!(r.cost, 100.0);
    assert_eq!(ev.cost_spent(), 100.0);
}

#[test]
fn request_file_layout() {
    let dir = tempfile::tempdir().unwrap();
    let ev = evaluator(dir.path(), "plain");
    ev.evaluate(&alpha(3), &[0.5, -0.5]).unwrap();
    let raw = std::fs::read_to_string(dir.path().join("last_request.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
    assert_eq!(v["fidelity"], serde_json::json!([3]));
    assert_eq!(v["params"], serde_json::json!([0.5, -0.5]));
    assert!(v["id"].is_string());
    // per-request scratch directories are cleaned up
    assert!(std::fs::read_dir(dir.path())
        .unwrap()
        .flatten()
        .all(|e| !e.path().is_dir()));
}

#[test]
fn failures_are_reported_and_not_charged() {
    let dir = tempfile::tempdir().unwrap();
    for (mode, needle) in [("fail", "diverged"), ("badid", "does not match"), ("noreply", "missing reply")] {
        let ev = evaluator(dir.path(), mode);
        let err = ev.evaluate(&alpha(1), &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }), "{mode}: {err}");
        assert!(err.to_string().contains(needle), "{mode}: {err}");
        assert_eq!(ev.cost_spent(), 0.0, "{mode}");
    }
}

#[test]
fn cli_run_with_external_solver() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = solver(dir.path(), "plain");
    let cfg = serde_json::json!({
        "schema_version": 1,
        "model": {
            "kind": "external",
            "command": cmd,
            "name": "py-linear",
            "domain": {"lower": [0.0, -1.0], "upper": [2.0, 1.0]},
            "fidelity_caps": [2],
            "cost": {"geometric": {"base": 4.0}}
        },
        "method": "misc",
        "budget": 40,
        "workers": 2,
        "distribution": {"samples": 500, "positive_support": false},
        "surface_resolution": 5
    });
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let out = dir.path().join("out");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_mfuq"))
        .args(["run", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .env_remove("MFUQ_CACHE")
        .env("RUST_LOG", "warn")
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    // E[(y1 + y2) * alpha] at the top fidelity: (1 + 0) * 2
    let mean = summary["methods"][0]["final_snapshot"]["mean"].as_f64().unwrap();
    assert!((mean - 2.0).abs() < 1e-12, "{mean}");
    assert!(out.join("cache.jsonl").exists());
}
