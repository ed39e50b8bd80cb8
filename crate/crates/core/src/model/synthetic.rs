use serde::{Deserialize, Serialize};

use super::{Computed, CostModel, Model, ModelSpec};
use crate::error::Result;
use crate::multiindex::MultiIndex;
use crate::quadrature::ParamDomain;

/// Closed-form noise-free quantity of interest on `[-1, 1]^N` coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Truth {
    /// `exp(t1) * prod_{n>=2} cos(t_n)`.
    ExpCos,
    Constant { value: f64 },
}

impl Truth {
    pub fn eval(&self, t: &[f64]) -> f64 {
        match self {
            Truth::ExpCos => t[0].exp() * t[1..].iter().map(|x| x.cos()).product::<f64>(),
            Truth::Constant { value } => *value,
        }
    }

    /// Exact mean under the uniform density.
    pub fn mean(&self, n: usize) -> f64 {
        match self {
            Truth::ExpCos => 1f64.sinh() * 1f64.sin().powi(n as i32 - 1),
            Truth::Constant { value } => *value,
        }
    }

    /// Exact standard deviation under the uniform density.
    pub fn std(&self, n: usize) -> f64 {
        match self {
            Truth::ExpCos => {
                // E[exp(2t)] = sinh(2)/2, E[cos^2 t] = (1 + sin(2)/2)/2
                let e2 = 0.5 * 2f64.sinh() * (0.5 * (1.0 + 0.5 * 2f64.sin())).powi(n as i32 - 1);
                let m = self.mean(n);
                (e2 - m * m).max(0.0).sqrt()
            }
            Truth::Constant { .. } => 0.0,
        }
    }

    pub fn range(&self, n: usize) -> f64 {
        match self {
            Truth::ExpCos => {
                if n == 1 {
                    1f64.exp() - (-1f64).exp()
                } else {
                    1f64.exp() - (-1f64).exp() * 1f64.cos().powi(n as i32 - 1)
                }
            }
            Truth::Constant { .. } => 0.0,
        }
    }
}

/// Analytic multi-fidelity stand-in for a discretized solver.
///
/// `G_alpha(y) = truth(t) + bias(alpha, t) + noise(alpha, y)` where `t` is
/// `y` mapped to `[-1, 1]^N`,
/// `bias = b * mean_i(decay^-alpha_i) * cos(3 t1 + t2)` and the noise is a
/// deterministic hash of `(seed, alpha, y)`, uniform in
/// `[-amp(alpha) * range, amp(alpha) * range]` with
/// `amp(alpha) = a * 2^-(|alpha|_1 - d)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SyntheticBenchmark {
    pub spec: ModelSpec,
    pub truth: Truth,
    pub bias_amplitude: f64,
    pub bias_decay: f64,
    pub noise: f64,
    pub seed: u64,
}

/// Desk-scale fixture: `exp(t1) cos(t2)` on the RoPax box, four fidelities
/// with cost `8^(alpha-1)`, bias `0.3 * 4^-alpha * cos(3 t1 + t2)`, noise
/// amplitude `0.01 * 2^-(alpha-1)` of the range.
pub fn default_benchmark() -> SyntheticBenchmark {
    SyntheticBenchmark {
        spec: ModelSpec {
            name: "exp-cos".into(),
            domain: ParamDomain::ropax(),
            fidelity_caps: vec![4],
            cost: CostModel::Geometric { base: 8.0 },
        },
        truth: Truth::ExpCos,
        bias_amplitude: 0.3,
        bias_decay: 4.0,
        noise: 0.01,
        seed: 0,
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl SyntheticBenchmark {
    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_params(&self) -> usize {
        self.spec.domain.dim()
    }

    pub fn truth_at(&self, y: &[f64]) -> f64 {
        self.truth.eval(&self.spec.domain.to_symmetric(y))
    }

    pub fn truth_mean(&self) -> f64 {
        self.truth.mean(self.n_params())
    }

    pub fn truth_std(&self) -> f64 {
        self.truth.std(self.n_params())
    }

    pub fn range(&self) -> f64 {
        self.truth.range(self.n_params())
    }

    pub fn bias_at(&self, alpha: &MultiIndex, y: &[f64]) -> f64 {
        let t = self.spec.domain.to_symmetric(y);
        let phase = 3.0 * t[0] + t.get(1).copied().unwrap_or(0.0);
        let scale = alpha
            .components()
            .iter()
            .map(|&a| self.bias_decay.powi(-(a as i32)))
            .sum::<f64>()
            / alpha.len() as f64;
        self.bias_amplitude * scale * phase.cos()
    }

    pub fn noise_amp(&self, alpha: &MultiIndex) -> f64 {
        let excess: u32 = alpha.components().iter().map(|a| a - 1).sum();
        self.noise * 2f64.powi(-(excess as i32))
    }

    /// Deterministic uniform draw in `[-1, 1]` keyed on `(seed, alpha, y)`.
    fn unit_noise(&self, alpha: &MultiIndex, y: &[f64]) -> f64 {
        let mut h = splitmix(self.seed);
        for &a in alpha.components() {
            h = splitmix(h ^ a as u64);
        }
        for u in self.spec.domain.to_unit(y) {
            h = splitmix(h ^ u.to_bits());
        }
        (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    pub fn value(&self, alpha: &MultiIndex, y: &[f64]) -> f64 {
        let mut v = self.truth_at(y) + self.bias_at(alpha, y);
        let amp = self.noise_amp(alpha);
        if amp > 0.0 {
            v += amp * self.range() * self.unit_noise(alpha, y);
        }
        v
    }
}

impl Model for SyntheticBenchmark {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn compute(&self, alpha: &MultiIndex, y: &[f64]) -> Result<Computed> {
        Ok(Computed {
            value: self.value(alpha, y),
            cost: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{cc_nodes, cc_weights};
    use approx::assert_abs_diff_eq;

    fn alpha(a: u32) -> MultiIndex {
        ModelSpec::scalar_alpha(a)
    }

    #[test]
    fn fixture_arithmetic() {
        let b = default_benchmark();
        assert_abs_diff_eq!(b.noise_amp(&alpha(4)), 0.00125, epsilon = 1e-18);
        let c = b.spec.domain.center();
        // cos(0) = 1 at the centre
        assert_abs_diff_eq!(b.bias_at(&alpha(4), &c), 0.3 / 256.0, epsilon = 1e-15);
    }

    #[test]
    fn noise_free_top_fidelity_is_truth_plus_bias() {
        let b = default_benchmark().with_noise(0.0);
        let y = [1.7, 0.25];
        assert_eq!(
            b.value(&alpha(4), &y),
            b.truth_at(&y) + b.bias_at(&alpha(4), &y)
        );
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        let b = default_benchmark().with_noise(0.05).with_seed(11);
        let y = [2.0, 0.27];
        let v1 = b.value(&alpha(1), &y);
        assert_eq!(v1, b.value(&alpha(1), &y));
        let clean = b.truth_at(&y) + b.bias_at(&alpha(1), &y);
        assert!((v1 - clean).abs() <= 0.05 * b.range());
        assert_ne!(v1, b.clone().with_seed(12).value(&alpha(1), &y));
    }

    /// High-order tensor CC quadrature of the truth, independent of the
    /// closed form used by `Truth::mean`.
    #[test]
    fn analytic_moments_match_quadrature() {
        let k = 65;
        let x = cc_nodes(k);
        let w = cc_weights(k);
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in 0..k {
            for j in 0..k {
                let v = Truth::ExpCos.eval(&[x[i], x[j]]);
                m1 += w[i] * w[j] * v;
                m2 += w[i] * w[j] * v * v;
            }
        }
        assert_abs_diff_eq!(m1, 1f64.sinh() * 1f64.sin(), epsilon = 1e-13);
        assert_abs_diff_eq!(Truth::ExpCos.mean(2), m1, epsilon = 1e-13);
        assert_abs_diff_eq!(Truth::ExpCos.std(2), (m2 - m1 * m1).sqrt(), epsilon = 1e-12);
    }
}
