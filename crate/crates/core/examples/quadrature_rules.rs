//! Nested Clenshaw–Curtis rules and tensor grids.

use mfuq::quadrature::{cc_nodes, cc_weights, level_to_nodes, tensor_rule, DEFAULT_GRID_CAP};
use mfuq::{MultiIndex, ParamDomain};

fn main() -> mfuq::Result<()> {
    for level in 1..=4 {
        let k = level_to_nodes(level);
        let nodes = cc_nodes(k);
        let weights = cc_weights(k);
        println!("level {level}: {k} nodes, weights sum to {:.15}", weights.iter().sum::<f64>());
        println!("  nodes {nodes:.4?}");
    }

    // E[y1^2 y2^4] for y uniform on [-1, 1]^2 is 1/3 * 1/5
    let dom = ParamDomain::symmetric(2);
    let rule = tensor_rule(&MultiIndex::new(vec![3, 3])?, &dom, DEFAULT_GRID_CAP)?;
    let values: Vec<f64> = rule.points.iter().map(|y| y[0].powi(2) * y[1].powi(4)).collect();
    println!(
        "{} point grid: E[y1^2 y2^4] = {:.15} (exact {:.15})",
        rule.len(),
        rule.integrate(&values),
        1.0 / 15.0
    );
    Ok(())
}
