//! Adaptive multi-fidelity stochastic RBF on the builtin benchmark.
//!
//! `cargo run --release --example srbf_multifidelity -- [budget]`

use std::sync::Arc;

use mfuq::model::{default_benchmark, Evaluator};
use mfuq::srbf::{Srbf, SrbfConfig};

fn main() -> mfuq::Result<()> {
    let budget: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3300.0);
    let bench = default_benchmark();
    let exact = bench.truth_mean();
    let evaluator = Evaluator::new(Arc::new(bench)).with_workers(4);
    // cheap level-1 infill makes a generous budget last many iterations;
    // cap them to keep the demo short
    let cfg = SrbfConfig {
        theta: 200,
        max_iterations: 12,
        ..SrbfConfig::with_budget(budget)
    };
    let mut srbf = Srbf::new(&evaluator, cfg)?;
    let stop = srbf.run()?;

    for log in srbf.logs() {
        let modes: Vec<String> = log
            .components
            .iter()
            .map(|c| format!("{:?}/K={}", c.mode, c.k_star))
            .collect();
        println!(
            "it {:>3} cost {:>6} mean {:.6} (err {:+.1e}) max U {:.3e} J {:?} {}",
            log.iteration,
            log.cost_spent,
            log.mean,
            log.mean - exact,
            log.max_uncertainty,
            log.training_sizes,
            modes.join(" ")
        );
    }
    println!(
        "stopped: {stop:?}; max U = {:.2}% of range",
        100.0 * srbf.max_uncertainty() / srbf.range()
    );
    let y = srbf_domain_point(&evaluator, &[0.2, 0.75]);
    println!("prediction at {y:.4?}: {:.5} +- {:.5}", srbf.predict(&y), srbf.uncertainty(&y));
    Ok(())
}

/// Physical point at the given unit-cube coordinates.
fn srbf_domain_point(evaluator: &Evaluator, u: &[f64]) -> Vec<f64> {
    evaluator.model().spec().domain.from_unit(u)
}
