//! Deterministic particle swarm on a multimodal function.

use mfuq::optimize::{pso_maximize, PsoConfig};
use mfuq::ParamDomain;

fn main() -> mfuq::Result<()> {
    let dom = ParamDomain::symmetric(2);
    // global maximum 1 at (0.5, -0.25), weaker bumps elsewhere
    let f = |y: &[f64]| {
        let bump = |cx: f64, cy: f64, h: f64| h * (-20.0 * ((y[0] - cx).powi(2) + (y[1] - cy).powi(2))).exp();
        bump(0.5, -0.25, 1.0) + bump(-0.6, 0.6, 0.8) + bump(-0.5, -0.7, 0.6)
    };
    let r = pso_maximize(f, &dom, &PsoConfig::default())?;
    println!("best {:?} value {:.12} after {} iterations", r.best, r.value, r.iterations);
    let again = pso_maximize(f, &dom, &PsoConfig::default())?;
    println!("bit-identical rerun: {}", again == r);
    Ok(())
}
