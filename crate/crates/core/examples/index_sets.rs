//! Downward-closed index sets, margins and combination coefficients.

use mfuq::misc::combination_coefficients;
use mfuq::{IndexSet, MultiIndex};

fn main() -> mfuq::Result<()> {
    let set = IndexSet::from_slices(&[&[1, 1], &[2, 1], &[1, 2], &[3, 1], &[2, 2]])?;
    println!("set:            {set:?}");
    println!("downward closed: {}", set.is_downward_closed());
    println!("margin:         {:?}", set.margin());
    println!("reduced margin: {:?}", set.reduced_margin());

    println!("combination coefficients:");
    for (k, c) in combination_coefficients(&set)? {
        println!("  {k} -> {c:+}");
    }

    // sets are allowed to leave the downward-closed family; the flag tracks it
    let mut grow = set.clone();
    grow.insert(MultiIndex::new(vec![1, 3])?)?;
    println!("with [1, 3]: closed = {}", grow.is_downward_closed());
    grow.insert(MultiIndex::new(vec![3, 3])?)?;
    println!("with [3, 3]: closed = {}", grow.is_downward_closed());
    grow.insert(MultiIndex::new(vec![2, 3])?)?;
    grow.insert(MultiIndex::new(vec![3, 2])?)?;
    println!("with [2, 3] and [3, 2]: closed = {}", grow.is_downward_closed());
    Ok(())
}
