use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use log::warn;
use serde::{Deserialize, Serialize};

use super::Model;
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Model,
    SurrogatePrediction,
}

/// One evaluation of the quantity of interest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub y: Vec<f64>,
    pub alpha: MultiIndex,
    pub value: f64,
    pub cost: f64,
    pub provisional: bool,
    pub origin: Origin,
}

impl EvalRecord {
    /// A placeholder row holding a surrogate prediction instead of a model
    /// value. Never charged, never persisted.
    pub fn provisional(alpha: MultiIndex, y: Vec<f64>, value: f64) -> Self {
        EvalRecord {
            y,
            alpha,
            value,
            cost: 0.0,
            provisional: true,
            origin: Origin::SurrogatePrediction,
        }
    }
}

/// Cost spent and evaluation counts since the evaluator was created.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ledger {
    pub cost_spent: f64,
    pub evaluations: usize,
    pub per_fidelity: BTreeMap<MultiIndex, usize>,
}

impl Ledger {
    /// Counts for a scalar fidelity index, position `a - 1` for level `a`.
    pub fn counts_by_level(&self, m: u32) -> Vec<usize> {
        (1..=m)
            .map(|a| {
                self.per_fidelity
                    .get(&MultiIndex::new(vec![a]).expect("level >= 1"))
                    .copied()
                    .unwrap_or(0)
            })
            .collect()
    }
}

/// Exact identity of an evaluation: fidelity plus the bit patterns of the
/// unit-cube coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    alpha: MultiIndex,
    bits: Vec<u64>,
}

type Cell = Arc<OnceLock<std::result::Result<EvalRecord, String>>>;

#[derive(Serialize, Deserialize)]
struct CacheLine {
    model: String,
    alpha: MultiIndex,
    key: Vec<String>,
    y: Vec<f64>,
    value: f64,
    cost: f64,
}

struct Persistence {
    path: PathBuf,
    stored: HashMap<Key, (Vec<f64>, f64, f64)>,
    file: Mutex<File>,
}

/// Caching front-end to a [`Model`].
///
/// Each distinct `(alpha, y)` is computed at most once and charged exactly
/// once. Concurrent requests for the same key wait on the first one. With a
/// cache file, previously computed values are replayed instead of being
/// recomputed, but are still charged to this evaluator's ledger on first
/// use so that cost accounting does not depend on what happens to be on
/// disk.
pub struct Evaluator {
    model: Arc<dyn Model>,
    cells: Mutex<HashMap<Key, Cell>>,
    ledger: Mutex<Ledger>,
    persistence: Option<Persistence>,
    workers: usize,
}

impl Evaluator {
    pub fn new(model: Arc<dyn Model>) -> Self {
        Evaluator {
            model,
            cells: Mutex::new(HashMap::new()),
            ledger: Mutex::new(Ledger::default()),
            persistence: None,
            workers: 1,
        }
    }

    /// Number of threads used by [`Evaluator::evaluate_batch`].
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    /// Attaches an append-only JSON-lines cache file, replaying its content.
    pub fn with_cache_file(mut self, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let name = self.model.spec().name.clone();
        let mut stored = HashMap::new();
        if path.exists() {
            let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (n, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheLine = match serde_json::from_str(&line) {
                    Ok(r) => r,
                    Err(e) => {
                        // a torn final line from an interrupted run
                        warn!("{}:{}: skipping unreadable cache line: {e}", path.display(), n + 1);
                        continue;
                    }
                };
                if rec.model != name {
                    continue;
                }
                let bits = rec
                    .key
                    .iter()
                    .map(|h| u64::from_str_radix(h, 16))
                    .collect::<std::result::Result<Vec<_>, _>>();
                if let Ok(bits) = bits {
                    stored.insert(
                        Key {
                            alpha: rec.alpha,
                            bits,
                        },
                        (rec.y, rec.value, rec.cost),
                    );
                }
            }
        }
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        self.persistence = Some(Persistence {
            path,
            stored,
            file: Mutex::new(file),
        });
        Ok(self)
    }

    pub fn model(&self) -> &dyn Model {
        self.model.as_ref()
    }

    pub fn ledger(&self) -> Ledger {
        self.ledger.lock().expect("ledger lock").clone()
    }

    pub fn cost_spent(&self) -> f64 {
        self.ledger.lock().expect("ledger lock").cost_spent
    }

    /// Whether `(alpha, y)` has already been evaluated in this session.
    pub fn is_cached(&self, alpha: &MultiIndex, y: &[f64]) -> bool {
        let key = self.key(alpha, y);
        self.cells
            .lock()
            .expect("cache lock")
            .get(&key)
            .is_some_and(|c| matches!(c.get(), Some(Ok(_))))
    }

    fn key(&self, alpha: &MultiIndex, y: &[f64]) -> Key {
        Key {
            alpha: alpha.clone(),
            bits: self
                .model
                .spec()
                .domain
                .to_unit(y)
                .into_iter()
                .map(f64::to_bits)
                .collect(),
        }
    }

    pub fn evaluate(&self, alpha: &MultiIndex, y: &[f64]) -> Result<EvalRecord> {
        let spec = self.model.spec();
        if !spec.alpha_available(alpha) {
            return Err(Error::FidelityUnavailable {
                alpha: alpha.clone(),
                caps: spec.fidelity_caps.clone(),
            });
        }
        spec.domain.check(y)?;
        let key = self.key(alpha, y);
        let cell = {
            let mut cells = self.cells.lock().expect("cache lock");
            cells.entry(key.clone()).or_default().clone()
        };
        let res = cell.get_or_init(|| self.compute_and_charge(&key, alpha, y));
        match res {
            Ok(r) => Ok(r.clone()),
            Err(reason) => {
                let mut cells = self.cells.lock().expect("cache lock");
                if cells.get(&key).is_some_and(|c| Arc::ptr_eq(c, &cell)) {
                    cells.remove(&key);
                }
                Err(Error::Evaluation {
                    alpha: alpha.clone(),
                    y: y.to_vec(),
                    reason: reason.clone(),
                })
            }
        }
    }

    fn compute_and_charge(
        &self,
        key: &Key,
        alpha: &MultiIndex,
        y: &[f64],
    ) -> std::result::Result<EvalRecord, String> {
        let spec = self.model.spec();
        let replay = self
            .persistence
            .as_ref()
            .and_then(|p| p.stored.get(key).cloned());
        let (value, cost) = match replay {
            Some((_, value, cost)) => (value, cost),
            None => {
                let c = self.model.compute(alpha, y).map_err(|e| match e {
                    Error::Evaluation { reason, .. } => reason,
                    other => other.to_string(),
                })?;
                let cost = c.cost.unwrap_or_else(|| spec.cost.cost(alpha));
                if let Some(p) = &self.persistence {
                    let line = CacheLine {
                        model: spec.name.clone(),
                        alpha: alpha.clone(),
                        key: key.bits.iter().map(|b| format!("{b:016x}")).collect(),
                        y: y.to_vec(),
                        value: c.value,
                        cost,
                    };
                    let mut txt = serde_json::to_string(&line).map_err(|e| e.to_string())?;
                    txt.push('\n');
                    let mut f = p.file.lock().expect("cache file lock");
                    if let Err(e) = f.write_all(txt.as_bytes()).and_then(|_| f.flush()) {
                        warn!("cannot append to {}: {e}", p.path.display());
                    }
                }
                (c.value, cost)
            }
        };
        let mut ledger = self.ledger.lock().expect("ledger lock");
        ledger.cost_spent += cost;
        ledger.evaluations += 1;
        *ledger.per_fidelity.entry(alpha.clone()).or_insert(0) += 1;
        Ok(EvalRecord {
            y: y.to_vec(),
            alpha: alpha.clone(),
            value,
            cost,
            provisional: false,
            origin: super::Origin::Model,
        })
    }

    /// Evaluates a batch; results are in request order and identical to
    /// sequential evaluation regardless of completion order.
    pub fn evaluate_batch(&self, requests: &[(MultiIndex, Vec<f64>)]) -> Vec<Result<EvalRecord>> {
        if self.workers <= 1 || requests.len() <= 1 {
            return requests.iter().map(|(a, y)| self.evaluate(a, y)).collect();
        }
        let chunk = requests.len().div_ceil(self.workers);
        std::thread::scope(|s| {
            let handles: Vec<_> = requests
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        part.iter()
                            .map(|(a, y)| self.evaluate(a, y))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("evaluation worker panicked"))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_benchmark, FnModel, ModelSpec};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn counting() -> (Arc<AtomicUsize>, Evaluator) {
        let calls = Arc::new(AtomicUsize::new(0));
        let c2 = calls.clone();
        let spec = default_benchmark().spec;
        let model = FnModel::new(spec, move |a, y| {
            c2.fetch_add(1, Ordering::SeqCst);
            a.get(0) as f64 + y[0]
        });
        (calls, Evaluator::new(Arc::new(model)))
    }

    #[test]
    fn cache_hit_charges_once() {
        let (calls, ev) = counting();
        let a = ModelSpec::scalar_alpha(4);
        let y = [2.0, 0.25];
        let r1 = ev.evaluate(&a, &y).unwrap();
        let r2 = ev.evaluate(&a, &y).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        assert_eq!(ev.cost_spent(), 512.0);
        assert_eq!(r1.cost, 512.0);
    }

    #[test]
    fn unavailable_fidelity_and_domain() {
        let (_, ev) = counting();
        assert!(matches!(
            ev.evaluate(&ModelSpec::scalar_alpha(5), &[2.0, 0.25]),
            Err(Error::FidelityUnavailable { .. })
        ));
        assert!(matches!(
            ev.evaluate(&ModelSpec::scalar_alpha(1), &[5.0, 0.25]),
            Err(Error::OutsideDomain { .. })
        ));
        assert_eq!(ev.cost_spent(), 0.0);
    }

    #[test]
    fn batch_duplicates_and_empty() {
        let (calls, ev) = counting();
        assert!(ev.evaluate_batch(&[]).is_empty());
        let a = ModelSpec::scalar_alpha(2);
        let reqs = vec![(a.clone(), vec![2.0, 0.25]), (a.clone(), vec![2.0, 0.25])];
        let out = ev.evaluate_batch(&reqs);
        assert_eq!(out[0].as_ref().unwrap(), out[1].as_ref().unwrap());
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        assert_eq!(ev.cost_spent(), 8.0);
    }

    #[test]
    fn threaded_batch_matches_sequential() {
        let bench = default_benchmark().with_seed(3);
        let dom = bench.spec.domain.clone();
        let reqs: Vec<(MultiIndex, Vec<f64>)> = (0..40)
            .map(|i| {
                let u = [(i % 7) as f64 / 6.0, (i % 5) as f64 / 4.0];
                (ModelSpec::scalar_alpha(1 + i % 4), dom.from_unit(&u))
            })
            .collect();
        let seq = Evaluator::new(Arc::new(bench.clone()));
        let par = Evaluator::new(Arc::new(bench)).with_workers(4);
        let a: Vec<_> = seq.evaluate_batch(&reqs).into_iter().map(|r| r.unwrap()).collect();
        let b: Vec<_> = par.evaluate_batch(&reqs).into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(a, b);
        assert_eq!(seq.ledger(), par.ledger());
    }

    #[test]
    fn persistence_replays_without_recomputing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let a = ModelSpec::scalar_alpha(3);
        let y = [1.5, 0.26];
        let first = {
            let (calls, ev) = counting();
            let ev = ev.with_cache_file(&path).unwrap();
            let r = ev.evaluate(&a, &y).unwrap();
            assert_eq!(calls.load(Ordering::SeqCst), 1);
            r
        };
        let (calls, ev) = counting();
        let ev = ev.with_cache_file(&path).unwrap();
        let again = ev.evaluate(&a, &y).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 0);
        assert_eq!(first, again);
        assert_eq!(ev.cost_spent(), 64.0);
    }
}
