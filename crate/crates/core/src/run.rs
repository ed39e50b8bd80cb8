//! Batch runs driven by a JSON configuration, and comparison of their
//! summaries.
//!
//! A configuration looks like
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "model": { "kind": "builtin", "name": "exp-cos", "noise": 0.01 },
//!   "method": "both",
//!   "budget": 2000,
//!   "seed": 7,
//!   "output_dir": "out"
//! }
//! ```
//!
//! Optional sections `misc`, `srbf`, `pso` and `distribution` take the
//! fields of [`MiscConfig`], [`SrbfConfig`], [`PsoConfig`] and
//! [`DistributionConfig`]; the shared `budget` replaces the engine budgets
//! and `pso` replaces `srbf.pso`. Unknown fields are rejected.
//!
//! Each method writes into `<output_dir>/<method>/`: `log.jsonl` (one record
//! per iteration), `convergence.csv`, `counts.csv`, `histogram.csv`,
//! `kde.csv`, `surface.csv`, SRBF also `uncertainty.csv`, and with `svg`
//! enabled a few charts. `<output_dir>/summary.json` collects the final and
//! per-iteration `(cost, mean, std)` of every method.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::misc::{Misc, MiscConfig};
use crate::model::{default_benchmark, CostModel, Evaluator, ExternalModel, Ledger, Model, ModelSpec};
use crate::optimize::PsoConfig;
use crate::quadrature::ParamDomain;
use crate::report::{
    self, ConvergenceRow, Series, SurfaceRaster, UncertaintyRow,
};
use crate::srbf::{Srbf, SrbfConfig};
use crate::stats::{qoi_distribution, DistributionConfig, QoiSummary};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Misc,
    Srbf,
    #[default]
    Both,
}

impl Method {
    fn engines(self) -> &'static [Method] {
        match self {
            Method::Misc => &[Method::Misc],
            Method::Srbf => &[Method::Srbf],
            Method::Both => &[Method::Misc, Method::Srbf],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Misc => "misc",
            Method::Srbf => "srbf",
            Method::Both => "both",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "misc" => Ok(Method::Misc),
            "srbf" => Ok(Method::Srbf),
            "both" => Ok(Method::Both),
            _ => Err(Error::config("method", format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// The synthetic `exp-cos` benchmark.
    Builtin {
        name: String,
        /// Noise amplitude as a fraction of the response range.
        #[serde(default)]
        noise: Option<f64>,
        /// Number of fidelities.
        #[serde(default)]
        fidelities: Option<u32>,
        /// Noise seed; defaults to the run seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    /// A solver speaking the request/reply file protocol.
    External {
        command: Vec<String>,
        /// Identifies the solver in the evaluation cache.
        name: String,
        domain: ParamDomain,
        fidelity_caps: Vec<u32>,
        #[serde(default)]
        cost: CostModel,
    },
}

pub const BUILTIN_MODELS: &[&str] = &["exp-cos"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelConfig,
    #[serde(default)]
    pub method: Method,
    pub budget: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub misc: Option<MiscConfig>,
    #[serde(default)]
    pub srbf: Option<SrbfConfig>,
    #[serde(default)]
    pub pso: Option<PsoConfig>,
    #[serde(default)]
    pub distribution: DistributionConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Grid points per direction of the response-surface raster.
    #[serde(default = "default_surface_resolution")]
    pub surface_resolution: usize,
    /// Threads for concurrent model evaluations.
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Evaluation cache; defaults to `<output_dir>/cache.jsonl`.
    #[serde(default)]
    pub cache_file: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("mfuq-out")
}

fn default_surface_resolution() -> usize {
    41
}

fn default_workers() -> usize {
    1
}

/// Command-line overrides applied on top of a loaded configuration.
#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub method: Option<Method>,
    pub budget: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub svg: bool,
    pub cache_file: Option<PathBuf>,
}

impl RunConfig {
    /// Parses and validates a configuration; parse errors carry the line
    /// and column.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(origin.display().to_string(), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn apply(&mut self, o: &RunOverrides) -> Result<()> {
        if let Some(m) = o.method {
            self.method = m;
        }
        if let Some(b) = o.budget {
            self.budget = b;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(c) = &o.cache_file {
            self.cache_file = Some(c.clone());
        }
        self.svg |= o.svg;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        if !(self.budget > 0.0) || !self.budget.is_finite() {
            return Err(Error::config("budget", "must be a finite number > 0"));
        }
        if self.surface_resolution < 2 {
            return Err(Error::config("surface_resolution", "must be >= 2"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be >= 1"));
        }
        match &self.model {
            ModelConfig::Builtin {
                name,
                noise,
                fidelities,
                ..
            } => {
                if !BUILTIN_MODELS.contains(&name.as_str()) {
                    return Err(Error::config(
                        "model.name",
                        format!("unknown builtin {name:?}; available: {BUILTIN_MODELS:?}"),
                    ));
                }
                if let Some(n) = noise {
                    if !(*n >= 0.0) {
                        return Err(Error::config("model.noise", "must be >= 0"));
                    }
                }
                if *fidelities == Some(0) {
                    return Err(Error::config("model.fidelities", "fidelity count must be >= 1"));
                }
            }
            ModelConfig::External { command, .. } => {
                if command.is_empty() {
                    return Err(Error::config("model.command", "empty command"));
                }
            }
        }
        self.model_spec()?.validate().map_err(prefix_model)?;
        if let Some(m) = &self.misc {
            m.clone_with_budget(self.budget).validate()?;
        }
        self.srbf_config().validate()?;
        Ok(())
    }

    fn model_spec(&self) -> Result<ModelSpec> {
        Ok(match &self.model {
            ModelConfig::Builtin { .. } => self.builtin()?.spec,
            ModelConfig::External {
                name,
                domain,
                fidelity_caps,
                cost,
                ..
            } => ModelSpec {
                name: name.clone(),
                domain: domain.clone(),
                fidelity_caps: fidelity_caps.clone(),
                cost: cost.clone(),
            },
        })
    }

    fn builtin(&self) -> Result<crate::model::SyntheticBenchmark> {
        let ModelConfig::Builtin {
            noise,
            fidelities,
            seed,
            ..
        } = &self.model
        else {
            return Err(Error::config("model.kind", "not a builtin model"));
        };
        let mut b = default_benchmark().with_seed(seed.unwrap_or(self.seed));
        if let Some(n) = noise {
            b = b.with_noise(*n);
        }
        if let Some(m) = fidelities {
            b.spec.fidelity_caps = vec![*m];
        }
        // the cache is keyed on the model name, so it must pin every setting
        // that changes values
        b.spec.name = format!(
            "{}:m={}:noise={}:seed={}",
            b.spec.name, b.spec.fidelity_caps[0], b.noise, b.seed
        );
        Ok(b)
    }

    pub fn build_model(&self) -> Result<Arc<dyn Model>> {
        Ok(match &self.model {
            ModelConfig::Builtin { .. } => Arc::new(self.builtin()?),
            ModelConfig::External { command, .. } => Arc::new(
                ExternalModel::new(self.model_spec()?, command)?
                    .with_scratch_dir(self.output_dir.join("scratch")),
            ),
        })
    }

    fn misc_config(&self) -> MiscConfig {
        self.misc
            .as_ref()
            .map(|m| m.clone_with_budget(self.budget))
            .unwrap_or_else(|| MiscConfig::with_budget(self.budget))
    }

    fn srbf_config(&self) -> SrbfConfig {
        let mut c = self.srbf.clone().unwrap_or_default();
        c.budget = self.budget;
        if let Some(p) = &self.pso {
            c.pso = p.clone();
        }
        c
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache_file
            .clone()
            .unwrap_or_else(|| self.output_dir.join("cache.jsonl"))
    }
}

fn prefix_model(e: Error) -> Error {
    match e {
        Error::Config { field, message } => Error::config(format!("model.{field}"), message),
        Error::InvalidDomain(m) => Error::config("model.domain", m),
        other => other,
    }
}

impl MiscConfig {
    fn clone_with_budget(&self, budget: f64) -> MiscConfig {
        MiscConfig {
            budget,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEvaluations {
    pub fidelity: String,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub cost_spent: f64,
    pub evaluations: usize,
    pub per_fidelity: Vec<FidelityEvaluations>,
}

impl From<&Ledger> for LedgerSummary {
    fn from(l: &Ledger) -> Self {
        LedgerSummary {
            cost_spent: l.cost_spent,
            evaluations: l.evaluations,
            per_fidelity: l
                .per_fidelity
                .iter()
                .map(|(a, &n)| FidelityEvaluations {
                    fidelity: a.to_string(),
                    evaluations: n,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QoiStats {
    pub mean: f64,
    pub std: f64,
    pub samples: usize,
    pub kde_bandwidth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Why the engine stopped, as logged by it.
    pub stop: String,
    pub final_snapshot: ConvergenceRow,
    /// One entry per iteration, iteration 0 first.
    pub snapshots: Vec<ConvergenceRow>,
    pub ledger: LedgerSummary,
    /// Statistics of the surrogate pushed through random samples.
    pub qoi: QoiStats,
    /// SRBF only: final maximum prediction uncertainty relative to range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_uncertainty: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub model: String,
    pub budget: f64,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

/// Runs every requested method and writes all outputs. Methods run one
/// after the other, each with its own evaluator and ledger sharing the
/// cache file.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let model = cfg.build_model()?;
    let mut summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        model: model.spec().name.clone(),
        budget: cfg.budget,
        seed: cfg.seed,
        methods: Vec::new(),
    };
    for &method in cfg.method.engines() {
        let evaluator = Evaluator::new(model.clone())
            .with_workers(cfg.workers)
            .with_cache_file(cfg.cache_path())?;
        let dir = out.join(method.name());
        info!("running {method} with budget {}", cfg.budget);
        let s = match method {
            Method::Misc => run_misc(cfg, &evaluator, &dir)?,
            Method::Srbf => run_srbf(cfg, &evaluator, &dir)?,
            Method::Both => unreachable!("expanded by engines()"),
        };
        info!(
            "{method}: cost {} mean {} std {} ({})",
            s.final_snapshot.cost, s.final_snapshot.mean, s.final_snapshot.std, s.stop
        );
        summary.methods.push(s);
    }
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    report::write_text(out.join("summary.json"), &text)?;
    Ok(summary)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    report::write_text(path, &text)
}

/// Outputs shared by both methods: convergence table, counts, sampled
/// distribution and surface.
fn write_common<F>(
    cfg: &RunConfig,
    dir: &Path,
    method: Method,
    rows: &[ConvergenceRow],
    ledger: &Ledger,
    dom: &ParamDomain,
    mut surrogate: F,
) -> Result<QoiSummary>
where
    F: FnMut(&[f64]) -> f64,
{
    report::write_convergence(dir.join("convergence.csv"), rows)?;
    let counts: Vec<_> = ledger
        .per_fidelity
        .iter()
        .map(|(a, &n)| (a.clone(), n))
        .collect();
    report::write_counts(dir.join("counts.csv"), &counts)?;
    let qoi = qoi_distribution(&mut surrogate, dom, cfg.seed, &cfg.distribution)?;
    report::write_histogram(dir.join("histogram.csv"), &qoi.histogram)?;
    report::write_kde(dir.join("kde.csv"), &qoi.kde)?;
    SurfaceRaster::sample(&mut surrogate, dom, cfg.surface_resolution)?
        .write_csv(dir.join("surface.csv"))?;
    if cfg.svg {
        let pts = |f: fn(&ConvergenceRow) -> f64| rows.iter().map(|r| (r.cost, f(r))).collect();
        report::write_text(
            dir.join("convergence.svg"),
            &report::line_chart_svg(
                &format!("{method}: estimates vs cost"),
                "cost",
                "estimate",
                &[
                    Series { name: "mean", points: pts(|r| r.mean) },
                    Series { name: "std", points: pts(|r| r.std) },
                ],
            ),
        )?;
        report::write_text(
            dir.join("distribution.svg"),
            &report::distribution_svg(&format!("{method}: QoI density"), &qoi.histogram, &qoi.kde),
        )?;
    }
    Ok(qoi)
}

fn qoi_stats(q: &QoiSummary) -> QoiStats {
    QoiStats {
        mean: q.mean,
        std: q.std,
        samples: q.samples_used,
        kde_bandwidth: q.kde.bandwidth,
    }
}

fn run_misc(cfg: &RunConfig, evaluator: &Evaluator, dir: &Path) -> Result<MethodSummary> {
    let mut misc = Misc::new(evaluator, cfg.misc_config())?;
    let stop = misc.run()?;
    let logs = misc.logs();
    write_jsonl(&dir.join("log.jsonl"), logs)?;
    let rows: Vec<ConvergenceRow> = logs
        .iter()
        .map(|l| ConvergenceRow {
            iteration: l.iteration,
            cost: l.cost_spent,
            mean: l.estimate,
            std: l.std,
        })
        .collect();
    let ledger = evaluator.ledger();
    let dom = evaluator.model().spec().domain.clone();
    let mut failure = None;
    let qoi = write_common(cfg, dir, Method::Misc, &rows, &ledger, &dom, |y| {
        misc.surrogate_eval(y, None).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::NAN
        })
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(MethodSummary {
        method: Method::Misc,
        stop: serde_json::to_value(stop)?.as_str().unwrap_or_default().to_string(),
        final_snapshot: rows.last().cloned().expect("the root is always logged"),
        snapshots: rows,
        ledger: LedgerSummary::from(&ledger),
        qoi: qoi_stats(&qoi),
        relative_uncertainty: None,
    })
}

fn run_srbf(cfg: &RunConfig, evaluator: &Evaluator, dir: &Path) -> Result<MethodSummary> {
    let mut scfg = cfg.srbf_config();
    let spec = evaluator.model().spec();
    let initial = scfg.initial_design_cost(spec);
    if initial > scfg.budget {
        warn!(
            "srbf: the initial design costs {initial}, above the budget {}; \
             evaluating the initial design only",
            scfg.budget
        );
        scfg.budget = initial;
    }
    let mut srbf = Srbf::new(evaluator, scfg)?;
    let stop = srbf.run()?;
    let logs = srbf.logs();
    write_jsonl(&dir.join("log.jsonl"), logs)?;
    let rows: Vec<ConvergenceRow> = logs
        .iter()
        .map(|l| ConvergenceRow {
            iteration: l.iteration,
            cost: l.cost_spent,
            mean: l.mean,
            std: l.std,
        })
        .collect();
    let range = srbf.range();
    let rel = |u: f64| if range > 0.0 { u / range } else { 0.0 };
    let unc: Vec<UncertaintyRow> = logs
        .iter()
        .map(|l| UncertaintyRow {
            iteration: l.iteration,
            cost: l.cost_spent,
            max_uncertainty: l.max_uncertainty,
            relative: rel(l.max_uncertainty),
        })
        .collect();
    report::write_uncertainty(dir.join("uncertainty.csv"), &unc)?;
    if cfg.svg {
        report::write_text(
            dir.join("uncertainty.svg"),
            &report::line_chart_svg(
                "srbf: maximum prediction uncertainty",
                "cost",
                "relative to range",
                &[Series {
                    name: "max U / range",
                    points: unc.iter().map(|r| (r.cost, r.relative)).collect(),
                }],
            ),
        )?;
    }
    let ledger = evaluator.ledger();
    let dom = spec.domain.clone();
    let qoi = write_common(cfg, dir, Method::Srbf, &rows, &ledger, &dom, |y| srbf.predict(y))?;
    Ok(MethodSummary {
        method: Method::Srbf,
        stop: serde_json::to_value(stop)?.as_str().unwrap_or_default().to_string(),
        final_snapshot: rows.last().cloned().expect("iteration 0 is always logged"),
        snapshots: rows,
        ledger: LedgerSummary::from(&ledger),
        qoi: qoi_stats(&qoi),
        relative_uncertainty: Some(rel(srbf.max_uncertainty())),
    })
}

/// One line of a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub source: PathBuf,
    pub method: Method,
    /// `"intermediate"` or `"final"`.
    pub snapshot: &'static str,
    pub iteration: usize,
    pub cost: f64,
    pub mean: f64,
    pub std: f64,
}

pub fn load_summary(path: impl AsRef<Path>) -> Result<RunSummary> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                message: format!("schema_version {v}, expected {SCHEMA_VERSION}"),
            })
        }
        None => {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                message: "missing schema_version".into(),
            })
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Final and intermediate snapshot of every method in every summary. The
/// intermediate snapshot is the last one at or before `iteration`; without
/// it, the middle of each run.
pub fn compare(paths: &[PathBuf], iteration: Option<usize>) -> Result<Vec<CompareRow>> {
    if paths.is_empty() {
        return Err(Error::InvalidArgument("compare needs at least one summary".into()));
    }
    let mut rows = Vec::new();
    for p in paths {
        let s = load_summary(p)?;
        for m in &s.methods {
            let mid = match iteration {
                Some(it) => m
                    .snapshots
                    .iter()
                    .rev()
                    .find(|r| r.iteration <= it)
                    .or(m.snapshots.first()),
                None => m.snapshots.get(m.snapshots.len().saturating_sub(1) / 2),
            }
            .unwrap_or(&m.final_snapshot);
            for (label, r) in [("intermediate", mid), ("final", &m.final_snapshot)] {
                rows.push(CompareRow {
                    source: p.clone(),
                    method: m.method,
                    snapshot: label,
                    iteration: r.iteration,
                    cost: r.cost,
                    mean: r.mean,
                    std: r.std,
                });
            }
        }
    }
    Ok(rows)
}

/// Aligned plain-text rendering of [`compare`] rows.
pub fn format_table(rows: &[CompareRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.source.display().to_string().len())
        .max()
        .unwrap_or(0)
        .max(6);
    let mut s = format!(
        "{:<width$} {:<8} {:<12} {:>9} {:>12} {:>14} {:>14}\n",
        "source", "method", "snapshot", "iteration", "cost", "mean", "std"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<width$} {:<8} {:<12} {:>9} {:>12.1} {:>14.6} {:>14.6}\n",
            r.source.display(),
            r.method.name(),
            r.snapshot,
            r.iteration,
            r.cost,
            r.mean,
            r.std
        ));
    }
    s
}
