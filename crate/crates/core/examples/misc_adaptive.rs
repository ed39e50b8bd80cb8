//! Adaptive multi-index stochastic collocation on the builtin benchmark.
//!
//! `cargo run --release --example misc_adaptive -- [budget] [noise]`

use std::sync::Arc;

use mfuq::misc::{Misc, MiscConfig};
use mfuq::model::{default_benchmark, Evaluator};

fn main() -> mfuq::Result<()> {
    let mut args = std::env::args().skip(1);
    let budget: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(2000.0);
    let noise: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.0);

    let bench = default_benchmark().with_noise(noise);
    let exact = bench.truth_mean();
    let evaluator = Evaluator::new(Arc::new(bench));
    let mut misc = Misc::new(&evaluator, MiscConfig::with_budget(budget))?;
    let stop = misc.run()?;

    println!("{:>4} {:>10} {:>8} {:>12} {:>10}", "it", "added", "cost", "mean", "error");
    for log in misc.logs() {
        let added = log.added.as_ref().map(|a| a.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:>4} {:>10} {:>8} {:>12.8} {:>10.2e}",
            log.iteration,
            added,
            log.cost_spent,
            log.estimate,
            log.estimate - exact
        );
    }
    println!("stopped: {stop:?}; std estimate {:.6}", misc.state().std());
    let ledger = evaluator.ledger();
    for (alpha, n) in &ledger.per_fidelity {
        println!("fidelity {alpha}: {n} evaluations");
    }
    Ok(())
}
