//! Drives a solver through the request/reply file protocol.
//!
//! The "solver" here is a shell script that reads the request with `sed`
//! and answers `value = 1 + y1 * fidelity`. Unix only.

use std::sync::Arc;

use mfuq::misc::{Misc, MiscConfig};
use mfuq::model::{CostModel, Evaluator, ExternalModel, ModelSpec};
use mfuq::ParamDomain;

const SOLVER: &str = r#"#!/bin/sh
req="$1"; rep="$2"
id=$(sed -n 's/.*"id":"\([^"]*\)".*/\1/p' "$req")
fid=$(sed -n 's/.*"fidelity":\[\([0-9]*\)\].*/\1/p' "$req")
y1=$(sed -n 's/.*"params":\[\([^],]*\).*/\1/p' "$req")
v=$(awk -v y="$y1" -v f="$fid" 'BEGIN { printf "%.17g", 1 + y * f }')
printf '{"id":"%s","value":%s}' "$id" "$v" > "$rep"
"#;

fn main() -> mfuq::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| mfuq::Error::InvalidArgument(e.to_string()))?;
    let script = dir.path().join("solver.sh");
    std::fs::write(&script, SOLVER).map_err(|e| mfuq::Error::InvalidArgument(e.to_string()))?;

    let spec = ModelSpec {
        name: "shell-linear".into(),
        domain: ParamDomain::unit(1),
        fidelity_caps: vec![2],
        cost: CostModel::Geometric { base: 4.0 },
    };
    let model = ExternalModel::new(spec, &["sh".to_string(), script.display().to_string()])?
        .with_scratch_dir(dir.path());
    let evaluator = Evaluator::new(Arc::new(model))
        .with_workers(2)
        .with_cache_file(dir.path().join("cache.jsonl"))?;
    let mut misc = Misc::new(&evaluator, MiscConfig::with_budget(60.0))?;
    let stop = misc.run()?;
    // E[1 + 2 y] = 2 on the top fidelity
    println!("estimate {:.12} after cost {} ({stop:?})", misc.estimate(), misc.state().cost_spent());
    println!("{} solver calls", evaluator.ledger().evaluations);
    Ok(())
}
