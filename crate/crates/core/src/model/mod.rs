//! Multi-fidelity model abstraction: cost model, builtin synthetic
//! benchmarks, the external-solver protocol and the caching evaluator.

mod external;
mod harness;
mod synthetic;

pub use external::{ExternalModel, ExternalReply, ExternalRequest};
pub use harness::{EvalRecord, Evaluator, Ledger, Origin};
pub use synthetic::{default_benchmark, SyntheticBenchmark, Truth};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::quadrature::ParamDomain;

/// Normalized cost of one evaluation at a given fidelity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// `prod_i base^(alpha_i - 1)`; `base = 8` for a 3-D grid halved per level.
    Geometric { base: f64 },
    /// Explicit per-level costs for a scalar fidelity index.
    Table { costs: Vec<f64> },
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::Geometric { base: 8.0 }
    }
}

impl CostModel {
    pub fn cost(&self, alpha: &MultiIndex) -> f64 {
        match self {
            CostModel::Geometric { base } => alpha
                .components()
                .iter()
                .map(|&a| base.powi(a as i32 - 1))
                .product(),
            CostModel::Table { costs } => costs[alpha.get(0) as usize - 1],
        }
    }
}

/// Static description of a model: parameter box, fidelity caps, costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub domain: ParamDomain,
    /// Highest available level per physical direction. A scalar fidelity
    /// index has a single entry, the number of fidelities `M`.
    pub fidelity_caps: Vec<u32>,
    pub cost: CostModel,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.fidelity_caps.is_empty() || self.fidelity_caps.len() > 3 {
            return Err(Error::config(
                "fidelity_caps",
                "need between 1 and 3 physical directions",
            ));
        }
        if self.fidelity_caps.contains(&0) {
            return Err(Error::config("fidelities", "fidelity count must be >= 1"));
        }
        match &self.cost {
            CostModel::Geometric { base } if !(*base > 1.0) => {
                Err(Error::config("cost.base", "must be > 1 for increasing costs"))
            }
            CostModel::Table { costs } => {
                if self.fidelity_caps.len() != 1 || costs.len() < self.fidelity_caps[0] as usize {
                    return Err(Error::config(
                        "cost.costs",
                        "table needs one entry per fidelity of a scalar index",
                    ));
                }
                if costs.iter().any(|c| !(*c > 0.0)) || costs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config(
                        "cost.costs",
                        "costs must be positive and strictly increasing",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn n_params(&self) -> usize {
        self.domain.dim()
    }

    pub fn d_phys(&self) -> usize {
        self.fidelity_caps.len()
    }

    /// Number of fidelities of a scalar index.
    pub fn n_fidelities(&self) -> u32 {
        self.fidelity_caps[0]
    }

    pub fn alpha_available(&self, alpha: &MultiIndex) -> bool {
        alpha.len() == self.fidelity_caps.len()
            && alpha
                .components()
                .iter()
                .zip(&self.fidelity_caps)
                .all(|(a, c)| *a >= 1 && a <= c)
    }

    pub fn scalar_alpha(level: u32) -> MultiIndex {
        MultiIndex::new(vec![level]).expect("fidelity levels start at 1")
    }
}

/// Raw result of a model call before caching and accounting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Computed {
    pub value: f64,
    /// Cost reported by the model itself, overriding the cost model.
    pub cost: Option<f64>,
}

pub trait Model: Send + Sync {
    fn spec(&self) -> &ModelSpec;

    /// Computes `G_alpha(y)`; `y` is in physical units.
    fn compute(&self, alpha: &MultiIndex, y: &[f64]) -> Result<Computed>;
}

type ModelFn = dyn Fn(&MultiIndex, &[f64]) -> f64 + Send + Sync;

/// A model backed by a closure. Handy for fixtures.
pub struct FnModel {
    spec: ModelSpec,
    f: Box<ModelFn>,
}

impl FnModel {
    pub fn new<F>(spec: ModelSpec, f: F) -> Self
    where
        F: Fn(&MultiIndex, &[f64]) -> f64 + Send + Sync + 'static,
    {
        FnModel {
            spec,
            f: Box::new(f),
        }
    }
}

impl Model for FnModel {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn compute(&self, alpha: &MultiIndex, y: &[f64]) -> Result<Computed> {
        Ok(Computed {
            value: (self.f)(alpha, y),
            cost: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_cost() {
        let c = CostModel::default();
        assert_eq!(c.cost(&ModelSpec::scalar_alpha(1)), 1.0);
        assert_eq!(c.cost(&ModelSpec::scalar_alpha(3)), 64.0);
        assert_eq!(c.cost(&ModelSpec::scalar_alpha(4)), 512.0);
        let a = MultiIndex::new(vec![2, 3]).unwrap();
        assert_eq!(c.cost(&a), 8.0 * 64.0);
    }

    #[test]
    fn spec_validation() {
        let mut s = ModelSpec {
            name: "x".into(),
            domain: ParamDomain::unit(2),
            fidelity_caps: vec![0],
            cost: CostModel::default(),
        };
        assert!(s.validate().is_err());
        s.fidelity_caps = vec![4];
        assert!(s.validate().is_ok());
        s.cost = CostModel::Table {
            costs: vec![1.0, 2.0, 2.0, 3.0],
        };
        assert!(s.validate().is_err());
    }
}
