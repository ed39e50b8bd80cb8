use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kmeans::kmeans_centers;
use crate::error::{Error, Result};

/// Points closer than this (unit-cube distance) are treated as one.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// Kernel exponents `tau_i = min + (i + 1/2) (max - min) / count`: the
/// midpoints of `count` equal strata of `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSamples {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl TauSamples {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && min < max && max.is_finite()) {
            return Err(Error::config("srbf.tau", "need 0 < tau_min < tau_max"));
        }
        if count == 0 {
            return Err(Error::config("srbf.theta", "need at least one tau sample"));
        }
        Ok(TauSamples { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.count as f64
    }

    pub fn get(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.get(i)).collect()
    }

    /// Writes `r^tau_i` for every sample. Uses the geometric recurrence
    /// `r^tau_{i+1} = r^tau_i * r^step`, so fitting and prediction share the
    /// exact same kernel values.
    pub fn powers_into(&self, r: f64, out: &mut [f64]) {
        let ratio = r.powf(self.step());
        let r4 = ratio * ratio * ratio * ratio;
        // four interleaved chains keep the multiplies independent
        let mut p = [0.0; 4];
        p[0] = r.powf(self.get(0));
        for k in 1..4 {
            p[k] = p[k - 1] * ratio;
        }
        let mut chunks = out.chunks_exact_mut(4);
        for c in &mut chunks {
            for k in 0..4 {
                c[k] = p[k];
                p[k] *= r4;
            }
        }
        for (o, pk) in chunks.into_remainder().iter_mut().zip(p) {
            *o = pk;
        }
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Solution of a kernel system.
#[derive(Clone, Debug, PartialEq)]
pub struct RbfFit {
    pub weights: Vec<f64>,
    /// The system was singular and the minimum-norm solution was returned.
    pub rank_deficient: bool,
}

fn solve_min_norm(a: DMatrix<f64>, rhs: &DVector<f64>) -> (DVector<f64>, bool) {
    let (rows, cols) = a.shape();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-13 * rows.max(cols) as f64;
    let rank = svd.singular_values.iter().filter(|s| **s > eps).count();
    let sol = svd
        .solve(rhs, eps.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(cols));
    (sol, rank < cols)
}

/// Solves `A w = f` exactly when `interpolate` (square system), otherwise in
/// the least-squares sense through the normal equations
/// `w = (A^T A)^-1 A^T f`. Falls back to the SVD minimum-norm solution when
/// the system is singular or too ill-conditioned for the fast path.
fn solve_system(a: DMatrix<f64>, rhs: &DVector<f64>, interpolate: bool) -> (DVector<f64>, bool) {
    if interpolate {
        if let Some(w) = a.clone().lu().solve(rhs) {
            if w.iter().all(|x| x.is_finite()) {
                return (w, false);
            }
        }
    } else {
        let at = a.transpose();
        if let Some(ch) = (&at * &a).cholesky() {
            let d = ch.l_dirty().diagonal();
            let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
            // diag(L)^2 ratio bounds cond(A^T A) from below
            if lo > hi * 1e-7 {
                let w = ch.solve(&(at * rhs));
                if w.iter().all(|x| x.is_finite()) {
                    return (w, false);
                }
            }
        }
        // Householder QR squares no condition number
        let k = a.ncols();
        let qr = a.clone().qr();
        let r = qr.r();
        let d = r.diagonal();
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x.abs()), hi.max(x.abs())));
        if lo > hi * 1e-12 {
            let qtb = qr.q().transpose() * rhs;
            if let Some(w) = r.solve_upper_triangular(&qtb.rows(0, k).into_owned()) {
                if w.iter().all(|x| x.is_finite()) {
                    return (w, false);
                }
            }
        }
    }
    solve_min_norm(a, rhs)
}

/// Weights of `f(y) = sum_j w_j ||y - c_j||^tau` fitted to `(points, values)`.
///
/// When the centres are the training points the system is square and is
/// solved exactly; with fewer centres it is solved by least squares.
pub fn rbf_fit(points: &[Vec<f64>], values: &[f64], centers: &[Vec<f64>], tau: f64) -> Result<RbfFit> {
    if points.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    if centers.is_empty() || centers.len() > points.len() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= K <= J centres, got K = {}, J = {}",
            centers.len(),
            points.len()
        )));
    }
    let a = DMatrix::from_fn(points.len(), centers.len(), |i, j| {
        dist(&points[i], &centers[j]).powf(tau)
    });
    let rhs = DVector::from_column_slice(values);
    let interpolate = centers == points;
    let (w, deficient) = solve_system(a, &rhs, interpolate);
    if deficient {
        warn!("rank-deficient RBF system (J = {}, K = {}); using the minimum-norm solution", points.len(), centers.len());
    }
    Ok(RbfFit {
        weights: w.iter().copied().collect(),
        rank_deficient: deficient,
    })
}

/// Groups points closer than [`DUPLICATE_TOL`], averaging their values.
pub(crate) fn dedup_points(points: &[Vec<f64>], values: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for (p, v) in points.iter().zip(values) {
        match pts.iter().position(|q| dist(p, q) < DUPLICATE_TOL) {
            Some(i) => {
                sums[i].0 += v;
                sums[i].1 += 1;
            }
            None => {
                pts.push(p.clone());
                sums.push((*v, 1));
            }
        }
    }
    (pts, sums.into_iter().map(|(s, n)| s / n as f64).collect())
}

fn dedup_centers(centers: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(centers.len());
    for c in centers {
        if !out.iter().any(|q| dist(&c, q) < DUPLICATE_TOL) {
            out.push(c);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// One centre per training point, exact interpolation.
    Interpolation,
    /// `centers` k-means centres, least-squares weights.
    Regression { centers: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateMode {
    Interpolation,
    Regression,
}

/// Stochastic RBF surrogate: the kernel exponent is sampled, each sample
/// gets its own weight vector, the prediction is the sample mean and the
/// uncertainty the width of the central 95% band.
///
/// Coordinates are those of the unit hypercube. Fits are made on responses
/// centred by their mean, which is added back on prediction, so constant
/// data is reproduced exactly.
#[derive(Clone, Debug)]
pub struct SrbfSurrogate {
    centers: Vec<Vec<f64>>,
    taus: TauSamples,
    /// Centre-major: `weights[j * count + i]` is the weight of centre `j`
    /// for tau sample `i`.
    weights: Vec<f64>,
    offset: f64,
    mode: SurrogateMode,
    rank_deficient: usize,
}

impl SrbfSurrogate {
    /// A surrogate that predicts `value` everywhere with zero uncertainty.
    pub fn constant(value: f64, taus: TauSamples) -> Self {
        SrbfSurrogate {
            centers: Vec::new(),
            taus,
            weights: Vec::new(),
            offset: value,
            mode: SurrogateMode::Interpolation,
            rank_deficient: 0,
        }
    }

    pub fn fit(points: &[Vec<f64>], values: &[f64], mode: FitMode, taus: TauSamples) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.is_empty() {
            return Ok(SrbfSurrogate::constant(0.0, taus));
        }
        let (pts, vals) = dedup_points(points, values);
        let offset = vals.iter().sum::<f64>() / vals.len() as f64;
        let rhs = DVector::from_iterator(vals.len(), vals.iter().map(|v| v - offset));

        let (centers, surrogate_mode) = match mode {
            FitMode::Regression { centers: k } if k < pts.len() => {
                if k == 0 {
                    return Err(Error::InvalidArgument("regression needs K >= 1".into()));
                }
                (
                    dedup_centers(kmeans_centers(&pts, k)?),
                    SurrogateMode::Regression,
                )
            }
            _ => (pts.clone(), SurrogateMode::Interpolation),
        };
        let (j, k, theta) = (pts.len(), centers.len(), taus.count);
        let interpolate = surrogate_mode == SurrogateMode::Interpolation;

        // kernel values for every tau at once
        let mut pow = vec![0.0; j * k * theta];
        for (row, p) in pts.iter().enumerate() {
            for (col, c) in centers.iter().enumerate() {
                let at = (row * k + col) * theta;
                taus.powers_into(dist(p, c), &mut pow[at..at + theta]);
            }
        }

        let mut weights = vec![0.0; k * theta];
        let mut rank_deficient = 0;
        for t in 0..theta {
            let a = DMatrix::from_fn(j, k, |r, c| pow[(r * k + c) * theta + t]);
            let (w, deficient) = solve_system(a, &rhs, interpolate);
            if deficient {
                rank_deficient += 1;
            }
            for (c, wc) in w.iter().enumerate() {
                weights[c * theta + t] = *wc;
            }
        }
        if rank_deficient > 0 {
            warn!(
                "{rank_deficient} of {theta} tau fits were rank deficient (J = {j}, K = {k}); minimum-norm weights used"
            );
        }
        Ok(SrbfSurrogate {
            centers,
            taus,
            weights,
            offset,
            mode: surrogate_mode,
            rank_deficient,
        })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn k_star(&self) -> usize {
        self.centers.len()
    }

    pub fn mode(&self) -> SurrogateMode {
        self.mode
    }

    pub fn taus(&self) -> TauSamples {
        self.taus
    }

    pub fn rank_deficient_fits(&self) -> usize {
        self.rank_deficient
    }

    /// `f(y, tau_i)` for every tau sample.
    pub fn tau_predictions(&self, y: &[f64]) -> Vec<f64> {
        let theta = self.taus.count;
        let mut acc = vec![self.offset; theta];
        let mut pw = vec![0.0; theta];
        for (c, center) in self.centers.iter().enumerate() {
            self.taus.powers_into(dist(y, center), &mut pw);
            let w = &self.weights[c * theta..(c + 1) * theta];
            for ((a, p), wi) in acc.iter_mut().zip(&pw).zip(w) {
                *a += wi * p;
            }
        }
        acc
    }

    /// Mean over the tau samples.
    pub fn predict(&self, y: &[f64]) -> f64 {
        let f = self.tau_predictions(y);
        f.iter().sum::<f64>() / f.len() as f64
    }

    /// `CDF^-1(0.975) - CDF^-1(0.025)` of the tau predictions.
    pub fn uncertainty(&self, y: &[f64]) -> f64 {
        if self.centers.is_empty() {
            return 0.0;
        }
        band_width(&mut self.tau_predictions(y))
    }

    pub fn predict_with_uncertainty(&self, y: &[f64]) -> (f64, f64) {
        let mut f = self.tau_predictions(y);
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        let u = if self.centers.is_empty() {
            0.0
        } else {
            band_width(&mut f)
        };
        (mean, u)
    }
}

/// Empirical quantile with a right-continuous CDF (`H(0) = 1`): the
/// `ceil(p n)`-th order statistic. Reorders `samples`.
pub fn empirical_quantile(samples: &mut [f64], p: f64) -> f64 {
    let n = samples.len();
    let rank = ((p * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let (_, v, _) = samples.select_nth_unstable_by(rank - 1, |a, b| a.total_cmp(b));
    *v
}

/// Width of the central 95% band of `samples`.
pub fn band_width(samples: &mut [f64]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let hi = empirical_quantile(samples, 0.975);
    let lo = empirical_quantile(samples, 0.025);
    (hi - lo).max(0.0)
}
