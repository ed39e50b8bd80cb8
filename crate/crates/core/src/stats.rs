//! Moments, histogram and density estimate of the quantity of interest.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::quadrature::{tensor_rule, ParamDomain, DEFAULT_GRID_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentRule {
    /// Full-factorial midpoint lattice with `per_dim` cells per direction.
    Midpoint { per_dim: usize },
    /// Tensor Clenshaw–Curtis rule of the given level in every direction.
    TensorCc { level: u32 },
}

impl MomentRule {
    pub const MIDPOINT_100: MomentRule = MomentRule::Midpoint { per_dim: 100 };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub points: usize,
}

impl Moments {
    fn from_sums(m1: f64, m2: f64, points: usize) -> Self {
        Moments {
            mean: m1,
            std: (m2 - m1 * m1).max(0.0).sqrt(),
            points,
        }
    }
}

/// Cell centres of the `per_dim^N` midpoint lattice of `dom`, last
/// direction fastest.
pub fn midpoint_lattice(dom: &ParamDomain, per_dim: usize, cap: usize) -> Result<Vec<Vec<f64>>> {
    let n = dom.dim();
    let total = (per_dim as u128).pow(n as u32);
    if per_dim == 0 {
        return Err(Error::InvalidArgument("midpoint rule needs >= 1 cell per direction".into()));
    }
    if total > cap as u128 {
        warn!("midpoint lattice of {total} points is too large; use a sparse quadrature instead");
        return Err(Error::GridTooLarge { requested: total, cap });
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let u: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) / per_dim as f64).collect();
        out.push(dom.from_unit(&u));
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

/// Mean and standard deviation of `f` under the uniform law on `dom`.
pub fn surrogate_moments<F>(mut f: F, dom: &ParamDomain, rule: MomentRule) -> Result<Moments>
where
    F: FnMut(&[f64]) -> f64,
{
    match rule {
        MomentRule::Midpoint { per_dim } => {
            let pts = midpoint_lattice(dom, per_dim, DEFAULT_GRID_CAP)?;
            let (mut m1, mut m2) = (0.0, 0.0);
            for p in &pts {
                let v = f(p);
                m1 += v;
                m2 += v * v;
            }
            let n = pts.len() as f64;
            Ok(Moments::from_sums(m1 / n, m2 / n, pts.len()))
        }
        MomentRule::TensorCc { level } => {
            let beta = MultiIndex::new(vec![level; dom.dim()])?;
            let rule = tensor_rule(&beta, dom, DEFAULT_GRID_CAP)?;
            let (mut m1, mut m2) = (0.0, 0.0);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let v = f(p);
                m1 += w * v;
                m2 += w * v * v;
            }
            Ok(Moments::from_sums(m1, m2, rule.len()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `count / (n * width)`.
    pub density: Vec<f64>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`; the last bin is closed. Constant
    /// data gives a single bin.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() || bins == 0 {
            return Err(Error::InvalidArgument("histogram needs values and >= 1 bin".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidArgument("histogram of non-finite values".into()));
        }
        let n = values.len();
        if hi == lo {
            let half = 0.5 * lo.abs().max(1.0) * 1e-6;
            return Ok(Histogram {
                edges: vec![lo - half, lo + half],
                counts: vec![n],
                density: vec![1.0 / (2.0 * half)],
            });
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins)
            .map(|i| if i == bins { hi } else { lo + i as f64 * width })
            .collect();
        let mut counts = vec![0usize; bins];
        for v in values {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let density = counts.iter().map(|c| *c as f64 / (n as f64 * width)).collect();
        Ok(Histogram {
            edges,
            counts,
            density,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kde {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    /// Bandwidth in the (possibly log-transformed) variable.
    pub bandwidth: f64,
    pub log_transformed: bool,
}

impl Kde {
    /// Trapezoidal integral of the density over its grid.
    pub fn integral(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, d)| 0.5 * (x[1] - x[0]) * (d[0] + d[1]))
            .sum()
    }
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    // linear interpolation between order statistics
    let h = p * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
}

/// Silverman's rule `0.9 min(sigma, IQR / 1.34) n^(-1/5)`, with fallbacks
/// for degenerate spread.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sigma = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = match (sigma > 0.0, iqr > 0.0) {
        (true, true) => sigma.min(iqr / 1.34),
        (true, false) => sigma,
        _ => 1e-3 * mean.abs().max(1.0),
    };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian kernel density estimate on a `points`-point grid.
///
/// With `positive_support` and strictly positive data the estimate is built
/// on `ln v` and mapped back with the Jacobian `1 / v`.
pub fn kde(values: &[f64], points: usize, positive_support: bool) -> Result<Kde> {
    if values.is_empty() || points < 2 {
        return Err(Error::InvalidArgument("density estimate needs values and >= 2 grid points".into()));
    }
    let mut log_transformed = positive_support;
    if positive_support && values.iter().any(|v| *v <= 0.0) {
        warn!("non-positive values: density estimate falls back to the untransformed data");
        log_transformed = false;
    }
    let data: Vec<f64> = if log_transformed {
        values.iter().map(|v| v.ln()).collect()
    } else {
        values.to_vec()
    };
    let h = silverman_bandwidth(&data);
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min) - 5.0 * h;
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 5.0 * h;
    let n = data.len() as f64;
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut x = Vec::with_capacity(points);
    let mut density = Vec::with_capacity(points);
    for i in 0..points {
        let t = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let s: f64 = data
            .iter()
            .map(|d| {
                let z = (t - d) / h;
                if z.abs() > 40.0 {
                    0.0
                } else {
                    (-0.5 * z * z).exp()
                }
            })
            .sum();
        let f = s * norm;
        if log_transformed {
            let v = t.exp();
            x.push(v);
            density.push(f / v);
        } else {
            x.push(t);
            density.push(f);
        }
    }
    Ok(Kde {
        x,
        density,
        bandwidth: h,
        log_transformed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct DistributionConfig {
    pub samples: usize,
    pub bins: usize,
    pub kde_points: usize,
    pub positive_support: bool,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        DistributionConfig {
            samples: 10_000,
            bins: 25,
            kde_points: 1024,
            positive_support: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QoiSummary {
    pub mean: f64,
    pub std: f64,
    pub samples_used: usize,
    pub histogram: Histogram,
    pub kde: Kde,
}

/// Pushes `cfg.samples` seeded uniform samples of `dom` through `f` and
/// summarizes the resulting values.
pub fn qoi_distribution<F>(mut f: F, dom: &ParamDomain, seed: u64, cfg: &DistributionConfig) -> Result<QoiSummary>
where
    F: FnMut(&[f64]) -> f64,
{
    if cfg.samples < 2 {
        return Err(Error::config("distribution.samples", "need at least 2 samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(cfg.samples);
    let mut y = vec![0.0; dom.dim()];
    for _ in 0..cfg.samples {
        for (d, yd) in y.iter_mut().enumerate() {
            *yd = rng.gen_range(dom.lower[d]..=dom.upper[d]);
        }
        values.push(f(&y));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(QoiSummary {
        mean,
        std: var.sqrt(),
        samples_used: values.len(),
        histogram: Histogram::new(&values, cfg.bins)?,
        kde: kde(&values, cfg.kde_points, cfg.positive_support)?,
    })
}
