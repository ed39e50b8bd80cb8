//! Adaptive multi-index stochastic collocation.
//!
//! A tensor estimate `Q[alpha, beta]` averages `G_alpha` over the CC grid of
//! `beta`. The estimator over a downward-closed set `L` is the sum of mixed
//! details `sum_{k in L} Delta[k]`, evaluated through the equivalent
//! combination-technique coefficients. The set is grown greedily by profit
//! (error contribution over work contribution) among indices that keep the
//! selected set downward closed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CostModel, Evaluator};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::quadrature::{level_to_nodes, tensor_interpolate, tensor_rule, DEFAULT_GRID_CAP};

/// Combination-technique coefficients of a downward-closed set:
/// `c[k] = sum_{j in {0,1}^D, k + j in L} (-1)^|j|`. Zero entries are
/// omitted.
pub fn combination_coefficients(lambda: &IndexSet) -> Result<BTreeMap<MultiIndex, i64>> {
    if !lambda.is_downward_closed() {
        let culprit = lambda
            .iter()
            .find(|k| k.backward_neighbours().any(|b| !lambda.contains(&b)))
            .cloned()
            .expect("a non-closed set has a member with a missing neighbour");
        return Err(Error::NotDownwardClosed(culprit));
    }
    let dim = lambda.dim();
    let mut out = BTreeMap::new();
    for k in lambda {
        let mut c = 0i64;
        for mask in 0u32..(1u32 << dim) {
            let mut up = k.components().to_vec();
            for (d, v) in up.iter_mut().enumerate() {
                if mask >> d & 1 == 1 {
                    *v += 1;
                }
            }
            if lambda.contains(&MultiIndex::new(up)?) {
                c += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            }
        }
        if c != 0 {
            out.insert(k.clone(), c);
        }
    }
    Ok(out)
}

/// Mixed detail `sum_{j in {0,1}^D} (-1)^|j| Q[k - j]`, with `Q = 0` as
/// soon as any component reaches zero.
pub fn mixed_detail<F>(k: &MultiIndex, mut q: F) -> Result<f64>
where
    F: FnMut(&MultiIndex) -> Result<f64>,
{
    let dim = k.len();
    let mut sum = 0.0;
    for mask in 0u32..(1u32 << dim) {
        let mut down = k.components().to_vec();
        let mut vanishes = false;
        for (d, v) in down.iter_mut().enumerate() {
            if mask >> d & 1 == 1 {
                *v -= 1;
                vanishes |= *v == 0;
            }
        }
        if vanishes {
            continue;
        }
        let val = q(&MultiIndex::new(down)?)?;
        if mask.count_ones() % 2 == 0 {
            sum += val;
        } else {
            sum -= val;
        }
    }
    Ok(sum)
}

/// Work of adding `[alpha, beta]`: `cost(alpha) * prod_n (m(beta_n) - m(beta_n - 1))`,
/// the number of grid points not already present in coarser nested grids.
pub fn work_contribution(alpha: &MultiIndex, beta: &MultiIndex, cost: &CostModel) -> f64 {
    let new_points: f64 = beta
        .components()
        .iter()
        .map(|&b| (level_to_nodes(b) - level_to_nodes(b - 1)) as f64)
        .product();
    cost.cost(alpha) * new_points
}

/// Tensor quadrature `Q[alpha, beta]` of `G_alpha` and of `G_alpha^2`,
/// together with the grid values in [`tensor_rule`] order.
pub fn tensor_estimate(
    evaluator: &Evaluator,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    grid_cap: usize,
) -> Result<GridData> {
    let dom = &evaluator.model().spec().domain;
    let rule = tensor_rule(beta, dom, grid_cap)?;
    let requests: Vec<(MultiIndex, Vec<f64>)> = rule
        .points
        .iter()
        .map(|p| (alpha.clone(), p.clone()))
        .collect();
    let values = evaluator
        .evaluate_batch(&requests)
        .into_iter()
        .map(|r| r.map(|rec| rec.value))
        .collect::<Result<Vec<f64>>>()?;
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    Ok(GridData {
        mean: rule.integrate(&values),
        second_moment: rule.integrate(&squares),
        values,
    })
}

/// Values on one tensor grid and their quadratures.
#[derive(Clone, Debug)]
pub struct GridData {
    pub values: Vec<f64>,
    pub mean: f64,
    pub second_moment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiscConfig {
    /// Per-direction caps on physical levels; defaults to the model's caps.
    #[serde(default)]
    pub max_alpha: Option<Vec<u32>>,
    /// Normalized cost budget. A step whose new work would exceed it is not
    /// started.
    #[serde(default)]
    pub budget: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Stop once the best available profit falls below this value.
    #[serde(default)]
    pub profit_floor: f64,
    #[serde(default = "default_grid_cap")]
    pub grid_cap: usize,
}

fn default_max_iterations() -> usize {
    1000
}

fn default_grid_cap() -> usize {
    DEFAULT_GRID_CAP
}

impl MiscConfig {
    pub fn with_budget(budget: f64) -> Self {
        MiscConfig {
            max_alpha: None,
            budget,
            max_iterations: default_max_iterations(),
            profit_floor: 0.0,
            grid_cap: default_grid_cap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0) {
            return Err(Error::config("misc.budget", "must be > 0"));
        }
        if let Some(caps) = &self.max_alpha {
            if caps.contains(&0) {
                return Err(Error::config("misc.max_alpha", "caps must be >= 1"));
            }
        }
        if self.profit_floor < 0.0 {
            return Err(Error::config("misc.profit_floor", "must be >= 0"));
        }
        Ok(())
    }
}

/// Error, work and profit of an explored index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub index: MultiIndex,
    pub detail: f64,
    pub error: f64,
    pub work: f64,
    pub profit: f64,
    /// False when the index needs a fidelity the model does not provide;
    /// such an index has zero profit and is never selected.
    pub available: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    MaxIterations,
    Stalled,
    ProfitFloor,
}

/// Per-iteration log record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MiscIterationLog {
    pub iteration: usize,
    pub added: Option<MultiIndex>,
    pub explored: Vec<IndexRecord>,
    pub estimate: f64,
    pub std: f64,
    pub cost_spent: f64,
    pub new_evaluations: Vec<FidelityCount>,
    pub total_evaluations: Vec<FidelityCount>,
    pub stalled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCount {
    pub alpha: MultiIndex,
    pub count: usize,
}

fn counts(map: &BTreeMap<MultiIndex, usize>) -> Vec<FidelityCount> {
    map.iter()
        .map(|(alpha, &count)| FidelityCount {
            alpha: alpha.clone(),
            count,
        })
        .collect()
}

/// State of the adaptive construction.
#[derive(Clone, Debug)]
pub struct MiscState {
    d_phys: usize,
    selected: IndexSet,
    explored: IndexSet,
    candidates: BTreeSet<MultiIndex>,
    records: BTreeMap<MultiIndex, IndexRecord>,
    grids: HashMap<MultiIndex, GridData>,
    estimate: f64,
    second_moment: f64,
    cost_spent: f64,
    iteration: usize,
    stalled: bool,
}

impl MiscState {
    /// `I`, the selected set.
    pub fn selected(&self) -> &IndexSet {
        &self.selected
    }

    /// `G`, every explored index; the estimator is built on this set.
    pub fn explored(&self) -> &IndexSet {
        &self.explored
    }

    /// `R`, explored (or unavailable) indices not yet selected.
    pub fn candidates(&self) -> &BTreeSet<MultiIndex> {
        &self.candidates
    }

    pub fn records(&self) -> &BTreeMap<MultiIndex, IndexRecord> {
        &self.records
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    /// `sqrt(E[G^2] - E[G]^2)` with both moments from the same combination.
    pub fn std(&self) -> f64 {
        (self.second_moment - self.estimate * self.estimate)
            .max(0.0)
            .sqrt()
    }

    pub fn cost_spent(&self) -> f64 {
        self.cost_spent
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_stalled(&self) -> bool {
        self.stalled
    }

    pub fn d_phys(&self) -> usize {
        self.d_phys
    }

    pub fn grid(&self, k: &MultiIndex) -> Option<&GridData> {
        self.grids.get(k)
    }
}

/// Adaptive MISC driver bound to an evaluator.
pub struct Misc<'a> {
    evaluator: &'a Evaluator,
    config: MiscConfig,
    caps: Vec<u32>,
    cost_base: f64,
    state: MiscState,
    logs: Vec<MiscIterationLog>,
}

impl<'a> Misc<'a> {
    /// Evaluates the root index and records iteration 0.
    pub fn new(evaluator: &'a Evaluator, config: MiscConfig) -> Result<Self> {
        config.validate()?;
        let spec = evaluator.model().spec();
        let d_phys = spec.d_phys();
        let caps = config
            .max_alpha
            .clone()
            .unwrap_or_else(|| spec.fidelity_caps.clone());
        if caps.len() != d_phys {
            return Err(Error::config(
                "misc.max_alpha",
                format!("expected {d_phys} entries, got {}", caps.len()),
            ));
        }
        let dim = d_phys + spec.n_params();
        let root = MultiIndex::root(dim);
        let cost_base = evaluator.cost_spent();
        let mut misc = Misc {
            evaluator,
            config,
            caps,
            cost_base,
            state: MiscState {
                d_phys,
                selected: IndexSet::from_indices(dim, [root.clone()])?,
                explored: IndexSet::from_indices(dim, [root.clone()])?,
                candidates: BTreeSet::new(),
                records: BTreeMap::new(),
                grids: HashMap::new(),
                estimate: 0.0,
                second_moment: 0.0,
                cost_spent: 0.0,
                iteration: 0,
                stalled: false,
            },
            logs: Vec::new(),
        };
        let before = evaluator.ledger().per_fidelity;
        let rec = misc.explore(&root)?;
        misc.state.records.insert(root.clone(), rec.clone());
        misc.refresh_estimate()?;
        misc.push_log(None, vec![rec], &before);
        Ok(misc)
    }

    pub fn state(&self) -> &MiscState {
        &self.state
    }

    pub fn config(&self) -> &MiscConfig {
        &self.config
    }

    pub fn logs(&self) -> &[MiscIterationLog] {
        &self.logs
    }

    pub fn estimate(&self) -> f64 {
        self.state.estimate
    }

    fn alpha_available(&self, k: &MultiIndex) -> bool {
        k.components()[..self.state.d_phys]
            .iter()
            .zip(&self.caps)
            .all(|(a, c)| a <= c)
    }

    fn work(&self, k: &MultiIndex) -> f64 {
        let (alpha, beta) = k.split(self.state.d_phys);
        work_contribution(&alpha, &beta, &self.evaluator.model().spec().cost)
    }

    /// `Q[k]` for an index whose grid is already evaluated.
    fn q(&self, k: &MultiIndex) -> Result<f64> {
        self.state
            .grids
            .get(k)
            .map(|g| g.mean)
            .ok_or_else(|| Error::InvalidArgument(format!("grid {k} has not been evaluated")))
    }

    /// Evaluates the grid of `k` and computes its error contribution.
    fn explore(&mut self, k: &MultiIndex) -> Result<IndexRecord> {
        let (alpha, beta) = k.split(self.state.d_phys);
        let grid = tensor_estimate(self.evaluator, &alpha, &beta, self.config.grid_cap)?;
        self.state.grids.insert(k.clone(), grid);
        self.state.cost_spent = self.evaluator.cost_spent() - self.cost_base;
        let detail = mixed_detail(k, |j| self.q(j))?;
        let work = self.work(k);
        let error = detail.abs();
        Ok(IndexRecord {
            index: k.clone(),
            detail,
            error,
            work,
            profit: error / work,
            available: true,
        })
    }

    fn refresh_estimate(&mut self) -> Result<()> {
        let coeffs = combination_coefficients(&self.state.explored)?;
        let (mut m1, mut m2) = (0.0, 0.0);
        for (k, c) in &coeffs {
            let g = &self.state.grids[k];
            m1 += *c as f64 * g.mean;
            m2 += *c as f64 * g.second_moment;
        }
        self.state.estimate = m1;
        self.state.second_moment = m2;
        Ok(())
    }

    /// Reduced-margin indices of `I` not explored yet.
    fn pending(&self) -> Vec<MultiIndex> {
        self.state
            .selected
            .reduced_margin()
            .iter()
            .filter(|j| !self.state.explored.contains(j) && !self.state.records.contains_key(j))
            .cloned()
            .collect()
    }

    /// Work the next step would add.
    pub fn next_step_work(&self) -> f64 {
        self.pending()
            .iter()
            .filter(|j| self.alpha_available(j))
            .map(|j| self.work(j))
            .sum()
    }

    /// One pass of the adaptive loop: explore the admissible margin, then
    /// move the most profitable candidate into `I`.
    pub fn step(&mut self) -> Result<()> {
        let before = self.evaluator.ledger().per_fidelity;
        let mut explored = Vec::new();
        for j in self.pending() {
            let rec = if self.alpha_available(&j) {
                let rec = self.explore(&j)?;
                self.state.explored.insert(j.clone())?;
                rec
            } else {
                debug!("index {j} needs an unavailable fidelity; profit set to 0");
                IndexRecord {
                    index: j.clone(),
                    detail: 0.0,
                    error: 0.0,
                    work: self.work(&j),
                    profit: 0.0,
                    available: false,
                }
            };
            self.state.records.insert(j.clone(), rec.clone());
            self.state.candidates.insert(j);
            explored.push(rec);
        }
        if !explored.is_empty() {
            self.refresh_estimate()?;
        }

        // highest profit, ties to the lexicographically smallest index
        let mut best: Option<(&MultiIndex, f64)> = None;
        for k in &self.state.candidates {
            let rec = &self.state.records[k];
            if !rec.available {
                continue;
            }
            if best.is_none_or(|(_, p)| rec.profit > p) {
                best = Some((k, rec.profit));
            }
        }
        let added = best.map(|(k, _)| k.clone());
        match &added {
            Some(k) => {
                self.state.candidates.remove(k);
                self.state.selected.insert(k.clone())?;
                self.state.stalled = false;
            }
            None => self.state.stalled = true,
        }
        debug_assert!(self.state.selected.is_downward_closed());
        self.state.iteration += 1;
        self.push_log(added, explored, &before);
        Ok(())
    }

    fn push_log(
        &mut self,
        added: Option<MultiIndex>,
        explored: Vec<IndexRecord>,
        before: &BTreeMap<MultiIndex, usize>,
    ) {
        let ledger = self.evaluator.ledger();
        let mut new = BTreeMap::new();
        for (a, &n) in &ledger.per_fidelity {
            let d = n - before.get(a).copied().unwrap_or(0);
            if d > 0 {
                new.insert(a.clone(), d);
            }
        }
        self.logs.push(MiscIterationLog {
            iteration: self.state.iteration,
            added,
            explored,
            estimate: self.state.estimate,
            std: self.state.std(),
            cost_spent: self.state.cost_spent,
            new_evaluations: counts(&new),
            total_evaluations: counts(&ledger.per_fidelity),
            stalled: self.state.stalled,
        });
    }

    /// Best profit among selectable candidates.
    fn best_available_profit(&self) -> Option<f64> {
        self.state
            .candidates
            .iter()
            .map(|k| &self.state.records[k])
            .filter(|r| r.available)
            .map(|r| r.profit)
            .fold(None, |acc, p| Some(acc.map_or(p, |a: f64| a.max(p))))
    }

    /// Runs until the budget, iteration cap, profit floor or a stall stops it.
    pub fn run(&mut self) -> Result<StopReason> {
        loop {
            if self.state.iteration >= self.config.max_iterations {
                return Ok(StopReason::MaxIterations);
            }
            if self.state.stalled {
                return Ok(StopReason::Stalled);
            }
            if self.state.cost_spent + self.next_step_work() > self.config.budget {
                return Ok(StopReason::Budget);
            }
            if self.config.profit_floor > 0.0 && self.state.iteration > 0 {
                if let Some(p) = self.best_available_profit() {
                    if p < self.config.profit_floor && self.pending().is_empty() {
                        return Ok(StopReason::ProfitFloor);
                    }
                }
            }
            self.step()?;
        }
    }

    /// Combination of tensor Lagrange interpolants over `G` evaluated at
    /// `y`. With `alpha_cap`, only indices with physical levels below the
    /// cap are combined.
    pub fn surrogate_eval(&self, y: &[f64], alpha_cap: Option<&[u32]>) -> Result<f64> {
        let dom = &self.evaluator.model().spec().domain;
        dom.check(y)?;
        let d = self.state.d_phys;
        let set = match alpha_cap {
            None => self.state.explored.clone(),
            Some(cap) => IndexSet::from_indices(
                self.state.explored.dim(),
                self.state
                    .explored
                    .iter()
                    .filter(|k| k.components()[..d].iter().zip(cap).all(|(a, c)| a <= c))
                    .cloned(),
            )?,
        };
        let mut acc = 0.0;
        for (k, c) in combination_coefficients(&set)? {
            let (_, beta) = k.split(d);
            let g = &self.state.grids[&k];
            acc += c as f64 * tensor_interpolate(&beta, dom, &g.values, y)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FnModel, ModelSpec};
    use crate::quadrature::ParamDomain;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn spec(n: usize, m: u32) -> ModelSpec {
        ModelSpec {
            name: "fixture".into(),
            domain: ParamDomain::symmetric(n),
            fidelity_caps: vec![m],
            cost: CostModel::default(),
        }
    }

    fn evaluator<F>(n: usize, m: u32, f: F) -> Evaluator
    where
        F: Fn(&MultiIndex, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Evaluator::new(Arc::new(FnModel::new(spec(n, m), f)))
    }

    #[test]
    fn coefficient_examples() {
        let c = combination_coefficients(&IndexSet::from_slices(&[&[1, 1]]).unwrap()).unwrap();
        assert_eq!(c, BTreeMap::from([(mi(&[1, 1]), 1)]));

        let square =
            IndexSet::from_slices(&[&[1, 1], &[2, 1], &[1, 2], &[2, 2]]).unwrap();
        let c = combination_coefficients(&square).unwrap();
        assert_eq!(c, BTreeMap::from([(mi(&[2, 2]), 1)]));

        let l = IndexSet::from_slices(&[&[1, 1], &[2, 1], &[1, 2]]).unwrap();
        let c = combination_coefficients(&l).unwrap();
        assert_eq!(
            c,
            BTreeMap::from([(mi(&[2, 1]), 1), (mi(&[1, 2]), 1), (mi(&[1, 1]), -1)])
        );

        let bad = IndexSet::from_slices(&[&[1, 1], &[2, 2]]).unwrap();
        assert!(matches!(
            combination_coefficients(&bad),
            Err(Error::NotDownwardClosed(_))
        ));
    }

    #[test]
    fn mixed_detail_expansion() {
        // Q[i,j] = 10 i + j
        let q = |k: &MultiIndex| Ok(10.0 * k.get(0) as f64 + k.get(1) as f64);
        assert_eq!(mixed_detail(&mi(&[1, 1]), q).unwrap(), 11.0);
        let expect = 22.0 - 21.0 - 12.0 + 11.0;
        assert_eq!(mixed_detail(&mi(&[2, 2]), q).unwrap(), expect);
    }

    #[test]
    fn work_examples() {
        let c = CostModel::default();
        assert_eq!(work_contribution(&mi(&[1]), &mi(&[1, 1]), &c), 1.0);
        assert_eq!(work_contribution(&mi(&[3]), &mi(&[1, 1]), &c), 64.0);
        assert_eq!(work_contribution(&mi(&[1]), &mi(&[2, 1]), &c), 2.0);
        assert_eq!(work_contribution(&mi(&[1]), &mi(&[3, 2]), &c), 4.0);
    }

    #[test]
    fn tensor_estimate_examples() {
        let ev = evaluator(2, 3, |_, _| 2.5);
        let g = tensor_estimate(&ev, &mi(&[2]), &mi(&[3, 2]), DEFAULT_GRID_CAP).unwrap();
        assert_abs_diff_eq!(g.mean, 2.5, epsilon = 1e-14);

        let ev = evaluator(2, 1, |_, y| y[0]);
        let g = tensor_estimate(&ev, &mi(&[1]), &mi(&[2, 1]), DEFAULT_GRID_CAP).unwrap();
        assert_abs_diff_eq!(g.mean, 0.0, epsilon = 1e-15);

        let ev = evaluator(2, 1, |_, y| y[0] * y[0]);
        let g = tensor_estimate(&ev, &mi(&[1]), &mi(&[2, 1]), DEFAULT_GRID_CAP).unwrap();
        assert_abs_diff_eq!(g.mean, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn first_step_explores_root_margin() {
        let ev = evaluator(2, 4, |a, y| a.get(0) as f64 * 0.01 + y[0].exp() * y[1].cos());
        let mut misc = Misc::new(&ev, MiscConfig::with_budget(1e9)).unwrap();
        assert_eq!(misc.state().cost_spent(), 1.0);
        misc.step().unwrap();
        let explored: Vec<_> = misc.logs()[1].explored.iter().map(|r| r.index.clone()).collect();
        assert_eq!(explored, vec![mi(&[1, 1, 2]), mi(&[1, 2, 1]), mi(&[2, 1, 1])]);
        assert_eq!(misc.state().cost_spent(), 1.0 + 2.0 + 2.0 + 8.0);
    }

    #[test]
    fn unavailable_fidelity_gets_zero_profit() {
        // alpha dominates so the algorithm wants alpha = 2 right away
        let ev = evaluator(1, 1, |a, _| 100.0 * a.get(0) as f64);
        let mut cfg = MiscConfig::with_budget(1e9);
        cfg.max_iterations = 3;
        let mut misc = Misc::new(&ev, cfg).unwrap();
        misc.step().unwrap();
        let rec = &misc.state().records()[&mi(&[2, 1])];
        assert!(!rec.available);
        assert_eq!(rec.profit, 0.0);
        assert!(misc.state().candidates().contains(&mi(&[2, 1])));
        assert!(!misc.state().selected().contains(&mi(&[2, 1])));
        assert!(!misc.state().explored().contains(&mi(&[2, 1])));
    }

    #[test]
    fn budget_of_one_evaluates_only_the_root() {
        let ev = evaluator(2, 4, |_, y| y[0] + 3.0);
        let mut misc = Misc::new(&ev, MiscConfig::with_budget(1.0)).unwrap();
        assert_eq!(misc.run().unwrap(), StopReason::Budget);
        assert_eq!(misc.state().cost_spent(), 1.0);
        assert_eq!(misc.estimate(), 3.0);
        assert_eq!(ev.ledger().evaluations, 1);
    }

    #[test]
    fn capped_fidelity_grows_parameters_only() {
        let ev = evaluator(1, 1, |_, y| y[0].exp());
        let mut cfg = MiscConfig::with_budget(100.0);
        cfg.max_alpha = Some(vec![1]);
        let mut misc = Misc::new(&ev, cfg).unwrap();
        assert_eq!(misc.run().unwrap(), StopReason::Budget);
        assert!(misc.state().selected().is_downward_closed());
        assert!(misc.state().cost_spent() <= 100.0);
        assert!(misc.state().selected().iter().all(|k| k.get(0) == 1));
        assert_abs_diff_eq!(misc.estimate(), 1f64.sinh(), epsilon = 1e-12);
    }

    #[test]
    fn constant_model_estimate_and_surrogate() {
        let ev = evaluator(2, 3, |_, _| 4.0);
        let mut cfg = MiscConfig::with_budget(300.0);
        cfg.max_iterations = 8;
        let mut misc = Misc::new(&ev, cfg).unwrap();
        misc.run().unwrap();
        for log in misc.logs() {
            assert_abs_diff_eq!(log.estimate, 4.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            misc.surrogate_eval(&[0.3, -0.2], None).unwrap(),
            4.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(misc.state().std(), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn surrogate_at_root_returns_stored_value() {
        let ev = evaluator(2, 2, |_, y| 1.0 + y[0] + 2.0 * y[1]);
        let misc = Misc::new(&ev, MiscConfig::with_budget(1.0)).unwrap();
        assert_eq!(misc.surrogate_eval(&[0.0, 0.0], None).unwrap(), 1.0);
        assert!(matches!(
            misc.surrogate_eval(&[2.0, 0.0], None),
            Err(Error::OutsideDomain { .. })
        ));
    }
}
