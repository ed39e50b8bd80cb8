use serde::{Deserialize, Serialize};

use super::rbf::{FitMode, SrbfSurrogate, TauSamples};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoocvResult {
    pub k_star: usize,
    pub rmse: f64,
    /// `(K, RMSE(K))` for every candidate.
    pub curve: Vec<(usize, f64)>,
}

/// Leave-one-out RMSE of the surrogate with `k` centres.
///
/// Each held-out fit has `J - 1` points, so `k` is capped at `J - 1`; at the
/// cap the held-out surrogate interpolates.
pub fn loocv_rmse(points: &[Vec<f64>], values: &[f64], k: usize, taus: TauSamples) -> Result<f64> {
    let j = points.len();
    if j < 2 {
        return Err(Error::InvalidArgument("leave-one-out needs at least 2 points".into()));
    }
    let k = k.min(j - 1);
    let mode = if k == j - 1 {
        FitMode::Interpolation
    } else {
        FitMode::Regression { centers: k }
    };
    let mut sq = 0.0;
    for i in 0..j {
        let pts: Vec<Vec<f64>> = (0..j).filter(|&l| l != i).map(|l| points[l].clone()).collect();
        let vals: Vec<f64> = (0..j).filter(|&l| l != i).map(|l| values[l]).collect();
        let s = SrbfSurrogate::fit(&pts, &vals, mode, taus)?;
        let e = s.predict(&points[i]) - values[i];
        sq += e * e;
    }
    Ok((sq / j as f64).sqrt())
}

/// Number of centres in `k_min..=k_max` minimizing the leave-one-out RMSE;
/// ties go to the smallest `K`.
pub fn loocv_select_k(
    points: &[Vec<f64>],
    values: &[f64],
    k_min: usize,
    k_max: usize,
    taus: TauSamples,
) -> Result<LoocvResult> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::InvalidArgument(format!(
            "empty candidate range [{k_min}, {k_max}]"
        )));
    }
    let cap = points.len().saturating_sub(1);
    let mut curve = Vec::with_capacity(k_max - k_min + 1);
    let mut capped: Option<f64> = None;
    for k in k_min..=k_max {
        // every K >= J - 1 gives the same held-out interpolant
        let r = if k >= cap {
            match capped {
                Some(r) => r,
                None => {
                    let r = loocv_rmse(points, values, k, taus)?;
                    capped = Some(r);
                    r
                }
            }
        } else {
            loocv_rmse(points, values, k, taus)?
        };
        curve.push((k, r));
    }
    let (k_star, rmse) = curve
        .iter()
        .copied()
        .fold((0, f64::INFINITY), |best, (k, r)| if r < best.1 { (k, r) } else { best });
    if k_star == 0 {
        return Err(Error::InvalidArgument("leave-one-out RMSE is not finite".into()));
    }
    Ok(LoocvResult { k_star, rmse, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::srbf::kmeans::kmeans_centers;
    use crate::srbf::rbf::rbf_fit;

    fn data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let pts: Vec<Vec<f64>> = (0..14)
            .map(|i| vec![((i * 5) % 7) as f64 / 6.0, ((i * 3) % 8) as f64 / 7.0])
            .collect();
        let vals = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (2.0 * p[0]).exp() * (p[1]).cos() + 0.05 * ((i * 37 % 11) as f64 - 5.0) / 5.0)
            .collect();
        (pts, vals)
    }

    // independent evaluation straight from the per-tau weights
    fn brute_force(points: &[Vec<f64>], values: &[f64], k: usize, taus: &[f64]) -> f64 {
        let j = points.len();
        let mut sq = 0.0;
        for i in 0..j {
            let pts: Vec<Vec<f64>> = (0..j).filter(|&l| l != i).map(|l| points[l].clone()).collect();
            let vals: Vec<f64> = (0..j).filter(|&l| l != i).map(|l| values[l]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let centred: Vec<f64> = vals.iter().map(|v| v - mean).collect();
            let centers = if k >= j - 1 { pts.clone() } else { kmeans_centers(&pts, k).unwrap() };
            let mut pred = 0.0;
            for &t in taus {
                let w = rbf_fit(&pts, &centred, &centers, t).unwrap().weights;
                let f: f64 = centers
                    .iter()
                    .zip(&w)
                    .map(|(c, w)| {
                        let r = ((points[i][0] - c[0]).powi(2) + (points[i][1] - c[1]).powi(2)).sqrt();
                        w * r.powf(t)
                    })
                    .sum();
                pred += mean + f;
            }
            pred /= taus.len() as f64;
            sq += (pred - values[i]).powi(2);
        }
        (sq / j as f64).sqrt()
    }

    #[test]
    fn matches_brute_force() {
        let (pts, vals) = data();
        let taus = TauSamples::new(1.0, 3.0, 8).unwrap();
        let res = loocv_select_k(&pts, &vals, 3, 14, taus).unwrap();
        for (k, r) in &res.curve {
            let b = brute_force(&pts, &vals, *k, &taus.values());
            assert!((r - b).abs() <= 1e-6 * b.max(1e-12), "K = {k}: {r} vs {b}");
        }
        let best = res.curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        assert_eq!(res.rmse, best);
        let first = res.curve.iter().find(|c| c.1 == best).unwrap().0;
        assert_eq!(res.k_star, first);
    }

    #[test]
    fn ties_go_to_smallest_k() {
        // constant data: every K gives zero error
        let (pts, _) = data();
        let vals = vec![1.5; pts.len()];
        let taus = TauSamples::new(1.0, 3.0, 4).unwrap();
        let res = loocv_select_k(&pts, &vals, 4, 9, taus).unwrap();
        assert_eq!(res.k_star, 4);
        assert!(loocv_select_k(&pts, &vals, 5, 4, taus).is_err());
    }
}
