use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use super::loocv::loocv_select_k;
use super::multifidelity::{choose_fidelity, MultiFidelitySurrogate};
use super::rbf::{dist, FitMode, SrbfSurrogate, TauSamples, DUPLICATE_TOL};
use crate::error::{Error, Result};
use crate::model::{EvalRecord, Evaluator, ModelSpec};
use crate::optimize::{pso_maximize, PsoConfig};
use crate::quadrature::ParamDomain;
use crate::stats::{midpoint_lattice, Moments};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDesign {
    /// Domain centre and the `2^N` corners.
    #[default]
    CenterCorners,
    /// Domain centre and the lower/upper bound of each parameter with the
    /// others at their centre (`2N + 1` points).
    CenterAxes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct SrbfConfig {
    pub budget: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Number of tau samples.
    pub theta: usize,
    /// Tau samples used by the leave-one-out search; each candidate `K`
    /// needs `J` fits per sample.
    pub loocv_theta: usize,
    /// Switch to regression once a surrogate has more points than this.
    /// Defaults to `5^N`.
    pub regression_threshold: Option<usize>,
    /// Smallest centre count of the first leave-one-out search. Defaults to
    /// `N + 1`.
    pub k_min: Option<usize>,
    /// Infill points per iteration.
    pub infill_batch: usize,
    /// Cost ratio of each fidelity; defaults to the model cost.
    pub gamma: Option<Vec<f64>>,
    pub initial_design: InitialDesign,
    pub max_iterations: usize,
    /// Stop once the maximum uncertainty falls to this fraction of the
    /// response range.
    pub stop_uncertainty: f64,
    /// Midpoint cells per direction for the moments.
    pub quadrature_per_dim: usize,
    /// Cells per direction of the fallback scan when the optimizer fails.
    pub scan_per_dim: usize,
    pub pso: PsoConfig,
}

impl Default for SrbfConfig {
    fn default() -> Self {
        SrbfConfig {
            budget: 6000.0,
            tau_min: 1.0,
            tau_max: 3.0,
            theta: 1000,
            loocv_theta: 10,
            regression_threshold: None,
            k_min: None,
            infill_batch: 4,
            gamma: None,
            initial_design: InitialDesign::CenterCorners,
            max_iterations: 500,
            stop_uncertainty: 0.0,
            quadrature_per_dim: 100,
            scan_per_dim: 21,
            pso: PsoConfig::default(),
        }
    }
}

impl SrbfConfig {
    pub fn with_budget(budget: f64) -> Self {
        SrbfConfig {
            budget,
            ..SrbfConfig::default()
        }
    }

    /// Cost of evaluating the initial design at every fidelity of `spec`.
    pub fn initial_design_cost(&self, spec: &ModelSpec) -> f64 {
        let points = initial_points(spec.n_params(), self.initial_design).len() as f64;
        points
            * (1..=spec.n_fidelities())
                .map(|a| spec.cost.cost(&ModelSpec::scalar_alpha(a)))
                .sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0) {
            return Err(Error::config("srbf.budget", "must be > 0"));
        }
        TauSamples::new(self.tau_min, self.tau_max, self.theta)?;
        if self.loocv_theta == 0 {
            return Err(Error::config("srbf.loocv_theta", "must be >= 1"));
        }
        if self.infill_batch == 0 {
            return Err(Error::config("srbf.infill_batch", "must be >= 1"));
        }
        if self.k_min == Some(0) {
            return Err(Error::config("srbf.k_min", "must be >= 1"));
        }
        if let Some(g) = &self.gamma {
            if g.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::config("srbf.gamma", "cost ratios must be > 0"));
            }
        }
        if self.stop_uncertainty < 0.0 {
            return Err(Error::config("srbf.stop_uncertainty", "must be >= 0"));
        }
        if self.quadrature_per_dim == 0 || self.scan_per_dim < 2 {
            return Err(Error::config("srbf", "quadrature/scan resolution too small"));
        }
        self.pso.validate()
    }
}

/// Fit settings of one component, carried between iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentTuning {
    pub mode: FitMode,
    pub k_star: usize,
    pub training_size: usize,
    /// Whether a leave-one-out search has run for this component.
    pub regression_started: bool,
    pub loocv_rmse: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentLog {
    /// 1 for the lowest-fidelity surrogate, `i + 1` for the `i`-th error.
    pub level: usize,
    pub mode: FitMode,
    pub k_star: usize,
    pub training_size: usize,
    pub loocv_rmse: Option<f64>,
    /// Leave-one-out RMSE relative to the response range.
    pub noise: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfillLog {
    pub y: Vec<f64>,
    pub fidelity: usize,
    pub uncertainties: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrbfIterationLog {
    pub iteration: usize,
    pub cost_spent: f64,
    pub mean: f64,
    pub std: f64,
    pub max_uncertainty: f64,
    pub max_uncertainty_at: Vec<f64>,
    /// Model evaluations per fidelity.
    pub training_sizes: Vec<usize>,
    pub infill: Vec<InfillLog>,
    pub components: Vec<ComponentLog>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrbfStop {
    Budget,
    MaxIterations,
    /// Maximum uncertainty at or below the threshold.
    Converged,
    /// No new point could be added.
    Stalled,
}

#[derive(Clone, Debug)]
struct Row {
    u: Vec<f64>,
    record: EvalRecord,
}

/// Mean of the top-fidelity prediction over the midpoint lattice with
/// `per_dim` cells per direction (unit-cube coordinates).
pub fn srbf_quadrature(mf: &MultiFidelitySurrogate, dim: usize, per_dim: usize) -> Result<Moments> {
    srbf_moments(mf, dim, per_dim, crate::quadrature::DEFAULT_GRID_CAP)
}

fn srbf_moments(mf: &MultiFidelitySurrogate, dim: usize, per_dim: usize, cap: usize) -> Result<Moments> {
    let pts = midpoint_lattice(&ParamDomain::unit(dim), per_dim, cap)?;
    let m = mf.n_fidelities();
    let (mut m1, mut m2) = (0.0, 0.0);
    for p in &pts {
        let v = mf.predict(m, p);
        m1 += v;
        m2 += v * v;
    }
    let n = pts.len() as f64;
    let (m1, m2) = (m1 / n, m2 / n);
    Ok(Moments {
        mean: m1,
        std: (m2 - m1 * m1).max(0.0).sqrt(),
        points: pts.len(),
    })
}

/// Point of maximum top-level uncertainty in the unit cube, with its
/// value. Falls back to the best point of a `scan_per_dim^N` lattice when
/// the swarm fails.
pub fn infill_point(
    mf: &MultiFidelitySurrogate,
    dim: usize,
    pso: &PsoConfig,
    scan_per_dim: usize,
) -> Result<(Vec<f64>, f64)> {
    let m = mf.n_fidelities();
    let unit = ParamDomain::unit(dim);
    match pso_maximize(|u| mf.uncertainty(m, u), &unit, pso) {
        Ok(r) => Ok((r.best, r.value)),
        Err(e) => {
            warn!("infill optimizer failed ({e}); scanning a {scan_per_dim}^{dim} lattice");
            let mut best: Option<(Vec<f64>, f64)> = None;
            let total = scan_per_dim.pow(dim as u32);
            for i in 0..total {
                let mut rest = i;
                let mut u = vec![0.0; dim];
                for d in (0..dim).rev() {
                    u[d] = (rest % scan_per_dim) as f64 / (scan_per_dim - 1) as f64;
                    rest /= scan_per_dim;
                }
                let v = mf.uncertainty(m, &u);
                if v.is_finite() && best.as_ref().is_none_or(|b| v > b.1) {
                    best = Some((u, v));
                }
            }
            best.ok_or_else(|| Error::InvalidArgument("uncertainty is not finite anywhere".into()))
        }
    }
}

fn initial_points(dim: usize, design: InitialDesign) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.5; dim]];
    match design {
        InitialDesign::CenterCorners => {
            for mask in 0..(1usize << dim) {
                pts.push((0..dim).map(|d| (mask >> d & 1) as f64).collect());
            }
        }
        InitialDesign::CenterAxes => {
            for d in 0..dim {
                for end in [0.0, 1.0] {
                    let mut p = vec![0.5; dim];
                    p[d] = end;
                    pts.push(p);
                }
            }
        }
    }
    pts
}

/// Adaptive multi-fidelity SRBF driver bound to an evaluator.
pub struct Srbf<'a> {
    evaluator: &'a Evaluator,
    config: SrbfConfig,
    domain: ParamDomain,
    gamma: Vec<f64>,
    taus: TauSamples,
    cv_taus: TauSamples,
    threshold: usize,
    k_min: usize,
    cost_base: f64,
    training: Vec<Vec<Row>>,
    tuning: Vec<ComponentTuning>,
    surrogate: MultiFidelitySurrogate,
    range: f64,
    /// Maximizer of the uncertainty of the current surrogate.
    argmax: (Vec<f64>, f64),
    moments: Moments,
    iteration: usize,
    logs: Vec<SrbfIterationLog>,
}

impl<'a> Srbf<'a> {
    /// Evaluates the initial design at every fidelity, builds the first
    /// surrogate and records iteration 0.
    pub fn new(evaluator: &'a Evaluator, config: SrbfConfig) -> Result<Self> {
        config.validate()?;
        let spec = evaluator.model().spec();
        if spec.d_phys() != 1 {
            return Err(Error::config(
                "model.fidelity_caps",
                "the SRBF engine needs a scalar fidelity index",
            ));
        }
        let m = spec.n_fidelities() as usize;
        let dim = spec.n_params();
        let gamma = match &config.gamma {
            Some(g) if g.len() != m => {
                return Err(Error::config(
                    "srbf.gamma",
                    format!("expected {m} entries, got {}", g.len()),
                ))
            }
            Some(g) => g.clone(),
            None => (1..=m as u32)
                .map(|a| spec.cost.cost(&ModelSpec::scalar_alpha(a)))
                .collect(),
        };
        let taus = TauSamples::new(config.tau_min, config.tau_max, config.theta)?;
        let cv_taus = TauSamples::new(config.tau_min, config.tau_max, config.loocv_theta)?;
        let threshold = config.regression_threshold.unwrap_or(5usize.pow(dim as u32));
        let k_min = config.k_min.unwrap_or(dim + 1);

        let design = initial_points(dim, config.initial_design);
        let cost_base = evaluator.cost_spent();
        let needed = config.initial_design_cost(spec);
        if needed > config.budget {
            return Err(Error::config(
                "srbf.budget",
                format!("{} is below the initial design cost {needed}", config.budget),
            ));
        }
        let domain = spec.domain.clone();
        let requests: Vec<_> = (1..=m as u32)
            .flat_map(|a| {
                design
                    .iter()
                    .map(move |u| (ModelSpec::scalar_alpha(a), u.clone()))
            })
            .map(|(a, u)| (a, domain.from_unit(&u)))
            .collect();
        let results = evaluator.evaluate_batch(&requests);
        let mut training: Vec<Vec<Row>> = vec![Vec::new(); m];
        for (i, res) in results.into_iter().enumerate() {
            let record = res?;
            training[i / design.len()].push(Row {
                u: design[i % design.len()].clone(),
                record,
            });
        }
        let top: Vec<f64> = training[m - 1].iter().map(|r| r.record.value).collect();
        let range = top.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - top.iter().copied().fold(f64::INFINITY, f64::min);

        let placeholder = FitMode::Interpolation;
        let mut srbf = Srbf {
            evaluator,
            gamma,
            taus,
            cv_taus,
            threshold,
            k_min,
            cost_base,
            tuning: vec![
                ComponentTuning {
                    mode: placeholder,
                    k_star: 0,
                    training_size: 0,
                    regression_started: false,
                    loocv_rmse: None,
                };
                m
            ],
            surrogate: MultiFidelitySurrogate::build(
                &vec![Vec::new(); m],
                &vec![placeholder; m],
                taus,
            )?,
            training,
            range,
            argmax: (vec![0.5; dim], 0.0),
            moments: Moments {
                mean: 0.0,
                std: 0.0,
                points: 0,
            },
            iteration: 0,
            logs: Vec::new(),
            domain,
            config,
        };
        srbf.rebuild(true)?;
        srbf.refresh_statistics()?;
        srbf.push_log(Vec::new());
        Ok(srbf)
    }

    pub fn config(&self) -> &SrbfConfig {
        &self.config
    }

    pub fn logs(&self) -> &[SrbfIterationLog] {
        &self.logs
    }

    pub fn surrogate(&self) -> &MultiFidelitySurrogate {
        &self.surrogate
    }

    pub fn tuning(&self) -> &[ComponentTuning] {
        &self.tuning
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn mean(&self) -> f64 {
        self.moments.mean
    }

    pub fn std(&self) -> f64 {
        self.moments.std
    }

    pub fn max_uncertainty(&self) -> f64 {
        self.argmax.1
    }

    /// Spread of the top-fidelity values of the initial design.
    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn cost_spent(&self) -> f64 {
        self.evaluator.cost_spent() - self.cost_base
    }

    /// Training records of fidelity `level` (1-based).
    pub fn training(&self, level: usize) -> Vec<EvalRecord> {
        self.training[level - 1].iter().map(|r| r.record.clone()).collect()
    }

    /// Top-fidelity prediction at a point of the parameter domain.
    pub fn predict(&self, y: &[f64]) -> f64 {
        self.surrogate
            .predict(self.surrogate.n_fidelities(), &self.domain.to_unit(y))
    }

    /// Uncertainty of the top-fidelity prediction at a point of the
    /// parameter domain.
    pub fn uncertainty(&self, y: &[f64]) -> f64 {
        self.surrogate
            .uncertainty(self.surrogate.n_fidelities(), &self.domain.to_unit(y))
    }

    fn training_sets(&self) -> Vec<Vec<(Vec<f64>, f64)>> {
        self.training
            .iter()
            .map(|rows| rows.iter().map(|r| (r.u.clone(), r.record.value)).collect())
            .collect()
    }

    /// Rebuilds every component. With `tune`, centre counts are re-selected
    /// (leave-one-out above the threshold, interpolation below); otherwise
    /// the previous settings are kept.
    fn rebuild(&mut self, tune: bool) -> Result<()> {
        let sets = self.training_sets();
        let taus = self.taus;
        let mut mf: Option<MultiFidelitySurrogate> = None;
        // bottom-up: each error set depends on the surrogate below it
        for i in 0..sets.len() {
            let (pts, vals): (Vec<Vec<f64>>, Vec<f64>) = match &mf {
                None => sets[0].iter().cloned().unzip(),
                Some(mf) => mf.error_data(&sets[i - 1], &sets[i]),
            };
            let mode = if tune {
                self.tune(i, &pts, &vals)?
            } else {
                match self.tuning[i].mode {
                    FitMode::Regression { centers } if centers < pts.len() => {
                        FitMode::Regression { centers }
                    }
                    _ => FitMode::Interpolation,
                }
            };
            let comp = if pts.is_empty() {
                SrbfSurrogate::constant(0.0, taus)
            } else {
                SrbfSurrogate::fit(&pts, &vals, mode, taus)?
            };
            match &mut mf {
                None => mf = Some(MultiFidelitySurrogate::from_base(comp)),
                Some(mf) => mf.push_error(comp),
            }
        }
        let mf = mf.expect("at least one fidelity");
        self.surrogate = mf;
        Ok(())
    }

    fn tune(&mut self, i: usize, pts: &[Vec<f64>], vals: &[f64]) -> Result<FitMode> {
        let j = pts.len();
        let t = &mut self.tuning[i];
        t.training_size = j;
        if j <= self.threshold || j < 2 {
            t.mode = FitMode::Interpolation;
            t.k_star = j;
            return Ok(t.mode);
        }
        let lo = if t.regression_started { t.k_star } else { self.k_min };
        let lo = lo.clamp(1, j);
        let res = loocv_select_k(pts, vals, lo, j, self.cv_taus)?;
        debug!("component {}: K* = {} over [{lo}, {j}], rmse {}", i + 1, res.k_star, res.rmse);
        t.regression_started = true;
        t.k_star = res.k_star;
        t.loocv_rmse = Some(res.rmse);
        t.mode = if res.k_star < j {
            FitMode::Regression { centers: res.k_star }
        } else {
            FitMode::Interpolation
        };
        Ok(t.mode)
    }

    fn refresh_statistics(&mut self) -> Result<()> {
        let dim = self.domain.dim();
        self.moments = srbf_moments(
            &self.surrogate,
            dim,
            self.config.quadrature_per_dim,
            crate::quadrature::DEFAULT_GRID_CAP,
        )?;
        self.argmax = infill_point(&self.surrogate, dim, &self.config.pso, self.config.scan_per_dim)?;
        Ok(())
    }

    fn push_log(&mut self, infill: Vec<InfillLog>) {
        let components = self
            .tuning
            .iter()
            .enumerate()
            .map(|(i, t)| ComponentLog {
                level: i + 1,
                mode: t.mode,
                k_star: t.k_star,
                training_size: t.training_size,
                loocv_rmse: t.loocv_rmse,
                noise: t
                    .loocv_rmse
                    .filter(|_| self.range > 0.0)
                    .map(|r| r / self.range),
            })
            .collect();
        let log = SrbfIterationLog {
            iteration: self.iteration,
            cost_spent: self.cost_spent(),
            mean: self.moments.mean,
            std: self.moments.std,
            max_uncertainty: self.argmax.1,
            max_uncertainty_at: self.domain.from_unit(&self.argmax.0),
            training_sizes: self.training.iter().map(Vec::len).collect(),
            infill,
            components,
        };
        info!(
            "srbf iteration {}: cost {}, mean {:.6}, std {:.6}, max U {:.3e}",
            log.iteration, log.cost_spent, log.mean, log.std, log.max_uncertainty
        );
        self.logs.push(log);
    }

    fn contains(&self, level: usize, u: &[f64]) -> bool {
        self.training[level].iter().any(|r| dist(&r.u, u) < DUPLICATE_TOL)
    }

    /// One outer iteration: `p` provisional infill sub-iterations, one batch
    /// of model evaluations, re-tuning and statistics. Returns `Some(stop)`
    /// when the batch could not be run; the state is then unchanged.
    pub fn step(&mut self) -> Result<Option<SrbfStop>> {
        let saved_surrogate = self.surrogate.clone();
        let spec_cost = self.evaluator.model().spec().cost.clone();
        let mut infill = Vec::new();
        let mut added: Vec<(usize, usize)> = Vec::new();
        for j in 0..self.config.infill_batch {
            let (u, _) = if j == 0 {
                self.argmax.clone()
            } else {
                infill_point(&self.surrogate, self.domain.dim(), &self.config.pso, self.config.scan_per_dim)?
            };
            let comps = self.surrogate.component_uncertainties(&u);
            let k = choose_fidelity(&comps, &self.gamma)?;
            let preds = self.surrogate.predict_all(&u);
            let mut inserted = false;
            for level in 0..k {
                if self.contains(level, &u) {
                    continue;
                }
                let y = self.domain.from_unit(&u);
                let alpha = ModelSpec::scalar_alpha(level as u32 + 1);
                self.training[level].push(Row {
                    u: u.clone(),
                    record: EvalRecord::provisional(alpha, y, preds[level]),
                });
                added.push((level, self.training[level].len() - 1));
                inserted = true;
            }
            infill.push(InfillLog {
                y: self.domain.from_unit(&u),
                fidelity: k,
                uncertainties: comps,
            });
            if !inserted {
                // the maximizer is already a training point: later
                // sub-iterations would find it again
                break;
            }
            if j + 1 < self.config.infill_batch {
                self.rebuild(false)?;
            }
        }
        if added.is_empty() {
            self.surrogate = saved_surrogate;
            return Ok(Some(SrbfStop::Stalled));
        }

        let requests: Vec<_> = added
            .iter()
            .map(|&(level, idx)| {
                let r = &self.training[level][idx].record;
                (r.alpha.clone(), r.y.clone())
            })
            .collect();
        let projected: f64 = requests
            .iter()
            .filter(|(a, y)| !self.evaluator.is_cached(a, y))
            .map(|(a, _)| spec_cost.cost(a))
            .sum();
        let rollback = |s: &mut Self| {
            for rows in &mut s.training {
                rows.retain(|r| !r.record.provisional);
            }
            s.surrogate = saved_surrogate.clone();
        };
        if self.cost_spent() + projected > self.config.budget {
            debug!("batch of cost {projected} would exceed the budget");
            rollback(self);
            return Ok(Some(SrbfStop::Budget));
        }
        let results = self.evaluator.evaluate_batch(&requests);
        let mut records = Vec::with_capacity(results.len());
        for r in results {
            match r {
                Ok(rec) => records.push(rec),
                Err(e) => {
                    rollback(self);
                    return Err(e);
                }
            }
        }
        for (&(level, idx), rec) in added.iter().zip(records) {
            self.training[level][idx].record = rec;
        }

        self.iteration += 1;
        self.rebuild(true)?;
        self.refresh_statistics()?;
        self.push_log(infill);
        Ok(None)
    }

    pub fn run(&mut self) -> Result<SrbfStop> {
        loop {
            if self.argmax.1 <= self.config.stop_uncertainty * self.range {
                return Ok(SrbfStop::Converged);
            }
            if self.iteration >= self.config.max_iterations {
                return Ok(SrbfStop::MaxIterations);
            }
            if let Some(stop) = self.step()? {
                return Ok(stop);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostModel, FnModel, ModelSpec};
    use std::sync::Arc;

    fn spec(m: u32) -> ModelSpec {
        ModelSpec {
            name: "fixture".into(),
            domain: ParamDomain::unit(2),
            fidelity_caps: vec![m],
            cost: CostModel::Geometric { base: 8.0 },
        }
    }

    fn small() -> SrbfConfig {
        SrbfConfig {
            theta: 100,
            loocv_theta: 10,
            pso: PsoConfig {
                max_iters: 40,
                ..PsoConfig::default()
            },
            quadrature_per_dim: 20,
            ..SrbfConfig::with_budget(120.0)
        }
    }

    #[test]
    fn initial_design_cost() {
        let model = FnModel::new(spec(4), |a, y| y[0] + 0.01 * a.get(0) as f64);
        let ev = Evaluator::new(Arc::new(model));
        let s = Srbf::new(&ev, SrbfConfig { budget: 3000.0, ..small() }).unwrap();
        assert_eq!(s.cost_spent(), 2925.0);
        assert_eq!(s.logs()[0].training_sizes, vec![5, 5, 5, 5]);
        assert!(Srbf::new(&Evaluator::new(Arc::new(FnModel::new(spec(4), |_, _| 0.0))), small()).is_err());
    }

    #[test]
    fn constant_model_stops_immediately() {
        let model = FnModel::new(spec(2), |_, _| 3.0);
        let ev = Evaluator::new(Arc::new(model));
        let mut s = Srbf::new(&ev, small()).unwrap();
        assert_eq!(s.run().unwrap(), SrbfStop::Converged);
        assert_eq!(s.max_uncertainty(), 0.0);
        assert!((s.mean() - 3.0).abs() < 1e-12);
        assert_eq!(s.iteration(), 0);
    }

    #[test]
    fn batch_inserts_p_points_and_stays_in_budget() {
        let model = FnModel::new(spec(2), |a, y| {
            (2.0 * y[0]).sin() * (1.0 + y[1]) + 0.1 * (a.get(0) as f64) * y[0] * y[1]
        });
        let ev = Evaluator::new(Arc::new(model));
        let mut s = Srbf::new(&ev, small()).unwrap();
        assert_eq!(s.cost_spent(), 45.0);
        assert_eq!(s.step().unwrap(), None);
        let log = s.logs().last().unwrap();
        assert_eq!(log.infill.len(), 4);
        let ledger = ev.ledger();
        let sizes = &log.training_sizes;
        assert_eq!(ledger.cost_spent, sizes[0] as f64 + 8.0 * sizes[1] as f64);
        assert!(s.training(1).iter().all(|r| !r.provisional));
        let stop = s.run().unwrap();
        assert!(s.cost_spent() <= 120.0);
        assert!(matches!(stop, SrbfStop::Budget | SrbfStop::Converged | SrbfStop::Stalled));
        for (a, b) in s.logs().windows(2).map(|w| (&w[0], &w[1])) {
            assert!(b.cost_spent >= a.cost_spent);
        }
    }

    #[test]
    fn interpolation_mode_reproduces_training_data() {
        let model = FnModel::new(spec(2), |a, y| y[0].exp() * y[1] + 0.2 * a.get(0) as f64 * y[1]);
        let ev = Evaluator::new(Arc::new(model));
        let s = Srbf::new(&ev, small()).unwrap();
        for r in s.training(2) {
            let u = s.domain.to_unit(&r.y);
            assert!((s.surrogate().predict(2, &u) - r.value).abs() < 1e-9);
            assert!(s.surrogate().uncertainty(2, &u) < 1e-9);
        }
    }

    #[test]
    fn quadrature_of_linear_surrogate() {
        let model = FnModel::new(spec(1), |_, y| y[0]);
        let ev = Evaluator::new(Arc::new(model));
        let s = Srbf::new(&ev, SrbfConfig { quadrature_per_dim: 100, ..small() }).unwrap();
        // five points of a linear function: the surrogate is not exactly
        // linear, but its midpoint mean is close to the truth
        assert!((s.mean() - 0.5).abs() < 0.05);
    }
}
