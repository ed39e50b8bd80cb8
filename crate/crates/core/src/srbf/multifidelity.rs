use super::rbf::{dist, FitMode, SrbfSurrogate, TauSamples, DUPLICATE_TOL};
use crate::error::{Error, Result};

/// Hierarchical surrogate: `G_1 ~ g_1`, `G_a ~ g_1 + e_1 + ... + e_{a-1}`,
/// where `e_i` is fitted to `G_{i+1} - (surrogate of G_i)` on the points
/// shared by the training sets of fidelities `i` and `i + 1`.
#[derive(Clone, Debug)]
pub struct MultiFidelitySurrogate {
    components: Vec<SrbfSurrogate>,
}

/// `(unit-cube point, value)` pairs per fidelity.
pub type TrainingSets = [Vec<(Vec<f64>, f64)>];

impl MultiFidelitySurrogate {
    /// `modes[0]` is used for the lowest fidelity, `modes[i]` for the
    /// `i`-th error surrogate. Error surrogates with no shared points are
    /// identically zero.
    pub fn build(training: &TrainingSets, modes: &[FitMode], taus: TauSamples) -> Result<Self> {
        if training.is_empty() || modes.len() != training.len() {
            return Err(Error::InvalidArgument(format!(
                "{} training sets but {} fit modes",
                training.len(),
                modes.len()
            )));
        }
        let (pts, vals): (Vec<_>, Vec<_>) = training[0].iter().cloned().unzip();
        let mut mf = MultiFidelitySurrogate {
            components: vec![SrbfSurrogate::fit(&pts, &vals, modes[0], taus)?],
        };
        for i in 1..training.len() {
            let (pts, vals) = mf.error_data(&training[i - 1], &training[i]);
            let e = if pts.is_empty() {
                SrbfSurrogate::constant(0.0, taus)
            } else {
                SrbfSurrogate::fit(&pts, &vals, modes[i], taus)?
            };
            mf.components.push(e);
        }
        Ok(mf)
    }

    /// Starts a hierarchy from its lowest-fidelity surrogate.
    pub fn from_base(base: SrbfSurrogate) -> Self {
        MultiFidelitySurrogate {
            components: vec![base],
        }
    }

    /// Appends the next error surrogate.
    pub fn push_error(&mut self, e: SrbfSurrogate) {
        self.components.push(e);
    }

    /// Training data of the next error surrogate: points of `upper` that are
    /// also in `lower`, with value `G_upper - current top-level prediction`.
    pub fn error_data(
        &self,
        lower: &[(Vec<f64>, f64)],
        upper: &[(Vec<f64>, f64)],
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let level = self.components.len();
        upper
            .iter()
            .filter(|(u, _)| lower.iter().any(|(l, _)| dist(u, l) < DUPLICATE_TOL))
            .map(|(u, v)| (u.clone(), v - self.predict(level, u)))
            .unzip()
    }

    pub fn n_fidelities(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SrbfSurrogate] {
        &self.components
    }

    /// Prediction of fidelity `level` (1-based) at unit-cube point `u`.
    pub fn predict(&self, level: usize, u: &[f64]) -> f64 {
        self.components[..level].iter().map(|c| c.predict(u)).sum()
    }

    /// Predictions of every fidelity at `u`.
    pub fn predict_all(&self, u: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        self.components
            .iter()
            .map(|c| {
                acc += c.predict(u);
                acc
            })
            .collect()
    }

    /// Uncertainty of each component at `u`.
    pub fn component_uncertainties(&self, u: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.uncertainty(u)).collect()
    }

    /// Root-sum-square of the component uncertainties up to `level`.
    pub fn uncertainty(&self, level: usize, u: &[f64]) -> f64 {
        self.components[..level]
            .iter()
            .map(|c| c.uncertainty(u).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Fidelity (1-based) maximizing `U_k / gamma_k`; ties go to the lowest.
pub fn choose_fidelity(uncertainties: &[f64], gamma: &[f64]) -> Result<usize> {
    if uncertainties.is_empty() || uncertainties.len() != gamma.len() {
        return Err(Error::InvalidArgument(format!(
            "{} uncertainties but {} cost ratios",
            uncertainties.len(),
            gamma.len()
        )));
    }
    if gamma.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidArgument("cost ratios must be > 0".into()));
    }
    let mut best = (1, f64::NEG_INFINITY);
    for (k, (u, g)) in uncertainties.iter().zip(gamma).enumerate() {
        let s = u / g;
        if s > best.1 {
            best = (k + 1, s);
        }
    }
    Ok(best.0)
}
