use crate::error::{Error, Result};

use super::rbf::dist;

const MAX_LLOYD_ITERS: usize = 100;

/// `k` cluster centres of `points` by Lloyd's algorithm.
///
/// Deterministic: seeded by farthest-point traversal starting from the point
/// nearest the data mean (ties to the lowest index). Empty clusters keep
/// their previous centre.
pub fn kmeans_centers(points: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "k-means needs 1 <= k <= {} points, got k = {k}",
            points.len()
        )));
    }
    let dim = points[0].len();
    let n = points.len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x / n as f64;
        }
    }
    let first = argmin((0..n).map(|i| dist(&points[i], &mean)));
    let mut centers = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| dist(p, &centers[0])).collect();
    while centers.len() < k {
        let next = argmax(nearest.iter().copied());
        centers.push(points[next].clone());
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(dist(p, &points[next]));
        }
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for (a, p) in assign.iter_mut().zip(points) {
            let c = argmin(centers.iter().map(|c| dist(p, c)));
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (a, p) in assign.iter().zip(points) {
            counts[*a] += 1;
            for (s, x) in sums[*a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    Ok(centers)
}

fn argmin(it: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in it.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn argmax(it: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in it.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_clusters_in_one_dimension() {
        let pts: Vec<Vec<f64>> = [0.0, 0.1, 0.2, 0.8, 0.9, 1.0].iter().map(|x| vec![*x]).collect();
        let mut c = kmeans_centers(&pts, 2).unwrap();
        c.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!((c[0][0] - 0.1).abs() < 1e-12);
        assert!((c[1][0] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_returns_the_points() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let mut c = kmeans_centers(&pts, 3).unwrap();
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut p = pts.clone();
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(c, p);
    }

    #[test]
    fn deterministic_and_bounded() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![((i * 7) % 13) as f64 / 12.0, ((i * 5) % 11) as f64 / 10.0])
            .collect();
        let a = kmeans_centers(&pts, 6).unwrap();
        assert_eq!(a, kmeans_centers(&pts, 6).unwrap());
        assert!(a.iter().flatten().all(|x| (0.0..=1.0).contains(x)));
        assert!(kmeans_centers(&pts, 0).is_err());
        assert!(kmeans_centers(&pts, 41).is_err());
    }
}
