//! Deterministic particle swarm maximization over a box.
//!
//! No random coefficients: particles start on a full-factorial lattice
//! (corners included, plus the centre) at rest, and follow the constricted
//! synchronous update `v <- chi [v + c1 (p_best - y) + c2 (g_best - y)]`.
//! Identical inputs give bit-identical trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::ParamDomain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct PsoConfig {
    /// Lattice points per direction; the swarm has `lattice^N` particles
    /// plus the centre when the lattice misses it.
    pub lattice: usize,
    pub max_iters: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Stop when the best value improved by less than `stagnation_tol`
    /// (relative) over this many iterations.
    pub stagnation_window: usize,
    pub stagnation_tol: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            lattice: 4,
            max_iters: 200,
            inertia: 0.721,
            cognitive: 1.655,
            social: 1.655,
            stagnation_window: 30,
            stagnation_tol: 1e-8,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lattice < 2 {
            return Err(Error::config("pso.lattice", "need at least 2 points per direction"));
        }
        if !(self.inertia > 0.0 && self.cognitive > 0.0 && self.social > 0.0) {
            return Err(Error::config("pso", "coefficients must be > 0"));
        }
        Ok(())
    }

    pub fn n_particles(&self, dim: usize) -> usize {
        let base = self.lattice.pow(dim as u32);
        if self.lattice % 2 == 1 {
            base
        } else {
            base + 1
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsoResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Best value after initialization and after every iteration.
    pub history: Vec<f64>,
    /// Particles frozen because the objective returned a non-finite value.
    pub frozen: Vec<usize>,
}

fn initial_lattice(dom: &ParamDomain, per_dim: usize) -> Vec<Vec<f64>> {
    let n = dom.dim();
    let total = per_dim.pow(n as u32);
    let mut out = Vec::with_capacity(total + 1);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let u: Vec<f64> = idx
            .iter()
            .map(|&i| i as f64 / (per_dim - 1) as f64)
            .collect();
        out.push(dom.from_unit(&u));
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
        }
    }
    if per_dim.is_multiple_of(2) {
        out.push(dom.center());
    }
    out
}

/// Maximizes `objective` over `dom`.
///
/// Fails only when the objective is non-finite at every initial particle.
pub fn pso_maximize<F>(mut objective: F, dom: &ParamDomain, cfg: &PsoConfig) -> Result<PsoResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let dim = dom.dim();
    let mut pos = initial_lattice(dom, cfg.lattice);
    let np = pos.len();
    let mut vel = vec![vec![0.0; dim]; np];
    let mut frozen = vec![false; np];
    let mut pbest = pos.clone();
    let mut pval = vec![f64::NEG_INFINITY; np];

    for i in 0..np {
        let f = objective(&pos[i]);
        if f.is_finite() {
            pval[i] = f;
        } else {
            frozen[i] = true;
        }
    }
    let mut g = None;
    for i in 0..np {
        if !frozen[i] && g.is_none_or(|j: usize| pval[i] > pval[j]) {
            g = Some(i);
        }
    }
    let Some(g0) = g else {
        return Err(Error::InvalidArgument(
            "objective is non-finite at every initial particle".into(),
        ));
    };
    let mut gbest = pbest[g0].clone();
    let mut gval = pval[g0];
    let mut history = vec![gval];

    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        iterations += 1;
        for i in 0..np {
            if frozen[i] {
                continue;
            }
            for d in 0..dim {
                let v = cfg.inertia
                    * (vel[i][d]
                        + cfg.cognitive * (pbest[i][d] - pos[i][d])
                        + cfg.social * (gbest[d] - pos[i][d]));
                let mut x = pos[i][d] + v;
                let mut v = v;
                if x < dom.lower[d] {
                    x = dom.lower[d];
                    v = 0.0;
                } else if x > dom.upper[d] {
                    x = dom.upper[d];
                    v = 0.0;
                }
                pos[i][d] = x;
                vel[i][d] = v;
            }
        }
        // synchronous: evaluate everyone, then update the bests
        for i in 0..np {
            if frozen[i] {
                continue;
            }
            let f = objective(&pos[i]);
            if !f.is_finite() {
                frozen[i] = true;
                continue;
            }
            if f > pval[i] {
                pval[i] = f;
                pbest[i].clone_from(&pos[i]);
            }
        }
        for i in 0..np {
            if !frozen[i] && pval[i] > gval {
                gval = pval[i];
                gbest.clone_from(&pbest[i]);
            }
        }
        history.push(gval);

        let w = cfg.stagnation_window;
        if w > 0 && history.len() > w {
            let old = history[history.len() - 1 - w];
            if gval - old <= cfg.stagnation_tol * gval.abs().max(1.0) {
                break;
            }
        }
        if vel.iter().zip(&frozen).all(|(v, f)| *f || v.iter().all(|x| *x == 0.0))
            && pos.iter().zip(&frozen).all(|(p, f)| *f || *p == gbest)
        {
            break;
        }
    }

    Ok(PsoResult {
        best: gbest,
        value: gval,
        iterations,
        history,
        frozen: (0..np).filter(|&i| frozen[i]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paraboloid_optimum() {
        let dom = ParamDomain::unit(2);
        let y0 = [0.3137, 0.7291];
        let f = |y: &[f64]| -((y[0] - y0[0]).powi(2) + (y[1] - y0[1]).powi(2));
        let r = pso_maximize(f, &dom, &PsoConfig::default()).unwrap();
        assert!((r.best[0] - y0[0]).abs() < 1e-4, "{:?}", r.best);
        assert!((r.best[1] - y0[1]).abs() < 1e-4, "{:?}", r.best);
    }

    #[test]
    fn linear_objective_hits_corner() {
        let dom = ParamDomain::new(vec![-1.0, 2.0], vec![1.0, 5.0]).unwrap();
        let r = pso_maximize(|y| 2.0 * y[0] - y[1], &dom, &PsoConfig::default()).unwrap();
        assert_eq!(r.best, vec![1.0, 2.0]);
    }

    #[test]
    fn constant_objective_is_reproducible() {
        let dom = ParamDomain::unit(2);
        let a = pso_maximize(|_| 1.0, &dom, &PsoConfig::default()).unwrap();
        let b = pso_maximize(|_| 1.0, &dom, &PsoConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.best, vec![0.0, 0.0]);
    }

    #[test]
    fn history_nondecreasing_and_inside_box() {
        let dom = ParamDomain::new(vec![0.0, -3.0, 1.0], vec![2.0, 3.0, 1.5]).unwrap();
        let f = |y: &[f64]| (3.0 * y[0]).sin() * (y[1] * y[2]).cos() + 0.1 * y[2];
        let r = pso_maximize(f, &dom, &PsoConfig::default()).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(dom.contains(&r.best));
    }

    #[test]
    fn non_finite_particles_are_frozen() {
        let dom = ParamDomain::unit(1);
        let r = pso_maximize(
            |y| if y[0] > 0.9 { f64::NAN } else { y[0] },
            &dom,
            &PsoConfig::default(),
        )
        .unwrap();
        assert!(!r.frozen.is_empty());
        assert!(r.value <= 0.9 && r.value > 0.6);
        assert!(pso_maximize(|_| f64::NAN, &dom, &PsoConfig::default()).is_err());
    }
}
