//! Both methods through the batch runner, then a comparison table.
//!
//! `cargo run --release --example compare_methods -- [out-dir]`

use std::path::PathBuf;

use mfuq::run::{compare, format_table, run, RunConfig};


fn main() -> mfuq::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mfuq-compare"));
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/bench.json");
    let mut cfg = RunConfig::load(&path)?;
    cfg.output_dir = out.clone();
    // a bit above the SRBF initial design, and few iterations, so that the
    // demo stays short
    cfg.budget = 3200.0;
    if let Some(s) = cfg.srbf.as_mut() {
        s.max_iterations = 8;
    }
    let summary = run(&cfg)?;
    for m in &summary.methods {
        println!("{}: ledger cost {} in {} evaluations", m.method, m.ledger.cost_spent, m.ledger.evaluations);
    }
    print!("{}", format_table(&compare(&[out.join("summary.json")], None)?));
    Ok(())
}
