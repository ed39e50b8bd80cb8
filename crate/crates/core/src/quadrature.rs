//! Nested Clenshaw–Curtis rules and their tensorization over a box.
//!
//! Node coordinates are generated from a reduced rational angle, so the
//! same physical node gets the same bits at every level. Nested grids
//! therefore share points exactly, which the evaluation cache relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

/// Default upper bound on the number of points of a single tensor grid.
pub const DEFAULT_GRID_CAP: usize = 10_000_000;

/// Axis-aligned box of uncertain parameters with uniform density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = ParamDomain { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn unit(n: usize) -> Self {
        ParamDomain {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    /// `[-1, 1]^n`.
    pub fn symmetric(n: usize) -> Self {
        ParamDomain {
            lower: vec![-1.0; n],
            upper: vec![1.0; n],
        }
    }

    /// Speed (m/s) and draught (m) ranges of the model-scale RoPax ferry.
    pub fn ropax() -> Self {
        ParamDomain {
            lower: vec![1.185, 0.2355],
            upper: vec![2.567, 0.2878],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::InvalidDomain(format!(
                "lower has {} entries, upper has {}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.lower.is_empty() {
            return Err(Error::InvalidDomain("zero-dimensional domain".into()));
        }
        for (i, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidDomain(format!(
                    "direction {i}: need finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.from_unit(&vec![0.5; self.dim()])
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim()
            && y.iter().enumerate().all(|(i, &v)| {
                let tol = 1e-12 * (self.upper[i] - self.lower[i]);
                v >= self.lower[i] - tol && v <= self.upper[i] + tol
            })
    }

    pub fn check(&self, y: &[f64]) -> Result<()> {
        if self.contains(y) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: y.to_vec() })
        }
    }

    /// Maps a physical point into the unit hypercube.
    pub fn to_unit(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(i, v)| (v - self.lower[i]) / (self.upper[i] - self.lower[i]))
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, v)| self.lower[i] + v * (self.upper[i] - self.lower[i]))
            .collect()
    }

    /// Maps a point of `[-1, 1]^n` into the box.
    pub fn from_symmetric(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .enumerate()
            .map(|(i, v)| self.lower[i] + (v + 1.0) * 0.5 * (self.upper[i] - self.lower[i]))
            .collect()
    }

    pub fn to_symmetric(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(i, v)| 2.0 * (v - self.lower[i]) / (self.upper[i] - self.lower[i]) - 1.0)
            .collect()
    }
}

/// Number of nodes at level `i`: `m(0)=0`, `m(1)=1`, `m(i)=2^(i-1)+1`.
pub fn level_to_nodes(i: u32) -> usize {
    match i {
        0 => 0,
        1 => 1,
        _ => (1usize << (i - 1)) + 1,
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `sin(pi * num / den)` evaluated from the reduced fraction, so equal
/// rationals give identical bits.
fn sin_pi_ratio(num: i64, den: u64) -> f64 {
    if num == 0 {
        return 0.0;
    }
    let sign = if num < 0 { -1.0 } else { 1.0 };
    let a = num.unsigned_abs();
    let g = gcd(a, den);
    let (a, d) = (a / g, den / g);
    sign * (std::f64::consts::PI * a as f64 / d as f64).sin()
}

/// Clenshaw–Curtis nodes `cos((j-1) pi / (K-1))`, `j = 1..K`, descending
/// from 1 to -1. A single node sits at the centre.
pub fn cc_nodes(k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let n = (k - 1) as i64;
            // cos(j pi / n) = sin(pi (n - 2j) / (2n)); exactly antisymmetric
            (0..k as i64)
                .map(|j| sin_pi_ratio(n - 2 * j, 2 * n as u64))
                .collect()
        }
    }
}

/// Clenshaw–Curtis weights normalized to sum to one (uniform density on
/// `[-1, 1]`). Direct cosine sum, `O(K^2)`.
pub fn cc_weights(k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let n = k - 1;
            let nf = n as f64;
            (0..k)
                .map(|j| {
                    let theta = j as f64 * std::f64::consts::PI / nf;
                    let mut s = 0.0;
                    for m in 1..=n / 2 {
                        let b = if 2 * m == n { 1.0 } else { 2.0 };
                        let mf = m as f64;
                        s += b / (4.0 * mf * mf - 1.0) * (2.0 * mf * theta).cos();
                    }
                    let c = if j == 0 || j == n { 1.0 } else { 2.0 };
                    // the unnormalized rule integrates over length 2
                    0.5 * c / nf * (1.0 - s)
                })
                .collect()
        }
    }
}

/// Barycentric weights for Chebyshev points of the second kind.
fn cc_bary_weights(k: usize) -> Vec<f64> {
    (0..k)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j + 1 == k {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Values of the `K` Lagrange basis polynomials on the CC nodes at `t`.
fn lagrange_basis(nodes: &[f64], t: f64) -> Vec<f64> {
    let k = nodes.len();
    if k == 1 {
        return vec![1.0];
    }
    if let Some(hit) = nodes.iter().position(|&x| x == t) {
        let mut e = vec![0.0; k];
        e[hit] = 1.0;
        return e;
    }
    let bw = cc_bary_weights(k);
    let terms: Vec<f64> = nodes.iter().zip(&bw).map(|(x, w)| w / (t - x)).collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / denom).collect()
}

/// Cartesian Clenshaw–Curtis grid for a parametric multi-index.
#[derive(Clone, Debug)]
pub struct TensorQuadRule {
    pub beta: MultiIndex,
    /// Points in the physical box, first direction varying slowest.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TensorQuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Quadrature of the given values (aligned with `points`).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

pub fn grid_size(beta: &MultiIndex) -> u128 {
    beta.components()
        .iter()
        .map(|&b| level_to_nodes(b) as u128)
        .product()
}

/// Tensor product of univariate CC rules with `m(beta_n)` nodes per
/// direction, mapped affinely onto `dom`.
pub fn tensor_rule(beta: &MultiIndex, dom: &ParamDomain, cap: usize) -> Result<TensorQuadRule> {
    if beta.len() != dom.dim() {
        return Err(Error::IndexLength {
            expected: dom.dim(),
            found: beta.len(),
        });
    }
    let size = grid_size(beta);
    if size > cap as u128 {
        return Err(Error::GridTooLarge {
            requested: size,
            cap,
        });
    }
    let nodes: Vec<Vec<f64>> = beta
        .components()
        .iter()
        .map(|&b| cc_nodes(level_to_nodes(b)))
        .collect();
    let weights_1d: Vec<Vec<f64>> = beta
        .components()
        .iter()
        .map(|&b| cc_weights(level_to_nodes(b)))
        .collect();

    let n = beta.len();
    let size = size as usize;
    let mut points = Vec::with_capacity(size);
    let mut weights = Vec::with_capacity(size);
    let mut idx = vec![0usize; n];
    for _ in 0..size {
        let t: Vec<f64> = (0..n).map(|d| nodes[d][idx[d]]).collect();
        points.push(dom.from_symmetric(&t));
        weights.push((0..n).map(|d| weights_1d[d][idx[d]]).product());
        // last direction fastest
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < nodes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(TensorQuadRule {
        beta: beta.clone(),
        points,
        weights,
    })
}

/// Tensor Lagrange interpolant through the CC grid of `beta`, evaluated
/// at `y`. `values` are aligned with [`tensor_rule`] point order.
pub fn tensor_interpolate(
    beta: &MultiIndex,
    dom: &ParamDomain,
    values: &[f64],
    y: &[f64],
) -> Result<f64> {
    dom.check(y)?;
    if beta.len() != dom.dim() {
        return Err(Error::IndexLength {
            expected: dom.dim(),
            found: beta.len(),
        });
    }
    let size = grid_size(beta);
    if values.len() as u128 != size {
        return Err(Error::InvalidArgument(format!(
            "{} values for a grid of {} points",
            values.len(),
            size
        )));
    }
    let t = dom.to_symmetric(y);
    let mut data = values.to_vec();
    // contract the fastest direction first
    for d in (0..beta.len()).rev() {
        let nodes = cc_nodes(level_to_nodes(beta.get(d)));
        let basis = lagrange_basis(&nodes, t[d].clamp(-1.0, 1.0));
        let k = nodes.len();
        data = data
            .chunks_exact(k)
            .map(|c| c.iter().zip(&basis).map(|(v, l)| v * l).sum())
            .collect();
    }
    Ok(data[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn level_function() {
        assert_eq!(level_to_nodes(0), 0);
        assert_eq!(level_to_nodes(1), 1);
        assert_eq!(level_to_nodes(2), 3);
        assert_eq!(level_to_nodes(3), 5);
        assert_eq!(level_to_nodes(11), 1025);
    }

    #[test]
    fn nodes_small() {
        assert_eq!(cc_nodes(1), vec![0.0]);
        assert_eq!(cc_nodes(3), vec![1.0, 0.0, -1.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let n5 = cc_nodes(5);
        for (a, b) in n5.iter().zip([1.0, h, 0.0, -h, -1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn nodes_nested_bitwise() {
        for level in 2..10 {
            let coarse = cc_nodes(level_to_nodes(level));
            let fine = cc_nodes(level_to_nodes(level + 1));
            for (j, x) in coarse.iter().enumerate() {
                assert_eq!(x.to_bits(), fine[2 * j].to_bits());
            }
        }
        // centre of level 1 is the middle node of every finer level
        assert_eq!(cc_nodes(9)[4].to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn weights_small() {
        assert_eq!(cc_weights(1), vec![1.0]);
        let w3 = cc_weights(3);
        for (a, b) in w3.iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let nodes = cc_nodes(3);
        let m2: f64 = nodes.iter().zip(&w3).map(|(x, w)| w * x * x).sum();
        assert_abs_diff_eq!(m2, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn tensor_rule_shapes() {
        let dom = ParamDomain::new(vec![0.0, 10.0], vec![2.0, 20.0]).unwrap();
        let r = tensor_rule(&mi(&[1, 1]), &dom, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(r.points, vec![vec![1.0, 15.0]]);
        assert_eq!(r.weights, vec![1.0]);

        let r = tensor_rule(&mi(&[2, 1]), &dom, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.points.iter().all(|p| p[1] == 15.0));

        let coarse = tensor_rule(&mi(&[2, 1]), &dom, DEFAULT_GRID_CAP).unwrap();
        let fine = tensor_rule(&mi(&[2, 2]), &dom, DEFAULT_GRID_CAP).unwrap();
        for p in &coarse.points {
            assert!(fine.points.contains(p));
        }
    }

    #[test]
    fn tensor_rule_cap() {
        let dom = ParamDomain::unit(3);
        let err = tensor_rule(&mi(&[10, 10, 10]), &dom, 1000).unwrap_err();
        assert!(matches!(err, Error::GridTooLarge { .. }));
    }

    #[test]
    fn interpolation_basics() {
        let dom = ParamDomain::symmetric(2);
        let beta = mi(&[2, 3]);
        let rule = tensor_rule(&beta, &dom, DEFAULT_GRID_CAP).unwrap();
        let c = vec![3.5; rule.len()];
        assert_abs_diff_eq!(
            tensor_interpolate(&beta, &dom, &c, &[0.3, -0.7]).unwrap(),
            3.5,
            epsilon = 1e-13
        );
        let vals: Vec<f64> = rule.points.iter().map(|p| p[0].exp() * p[1]).collect();
        for (p, v) in rule.points.iter().zip(&vals) {
            assert_eq!(tensor_interpolate(&beta, &dom, &vals, p).unwrap(), *v);
        }
        assert!(matches!(
            tensor_interpolate(&beta, &dom, &vals, &[1.5, 0.0]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn interpolation_reproduces_bilinear() {
        let dom = ParamDomain::new(vec![1.0, -2.0], vec![3.0, 0.0]).unwrap();
        let beta = mi(&[2, 2]);
        let rule = tensor_rule(&beta, &dom, DEFAULT_GRID_CAP).unwrap();
        let f = |p: &[f64]| 1.0 + 2.0 * p[0] - 0.5 * p[1] + 0.25 * p[0] * p[1];
        let vals: Vec<f64> = rule.points.iter().map(|p| f(p)).collect();
        for (a, b) in [(1.3, -1.1), (2.9, -0.01), (2.0, -2.0)] {
            let y = [a, b];
            assert_abs_diff_eq!(
                tensor_interpolate(&beta, &dom, &vals, &y).unwrap(),
                f(&y),
                epsilon = 1e-12
            );
        }
    }
}
