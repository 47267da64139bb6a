//! Dataset store and the per-dataset cache of fitted envelopes.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use fdenvelope_core::{EnvelopeCurve, InterpolatedEnvelope, Method, MethodFit, PValueFamily, Result, VERSION};
use sha2::{Digest, Sha256};

/// Default cap on the number of hypotheses per dataset.
pub const DEFAULT_MAX_M: usize = 20_000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_m: usize,
    /// Directory where uploaded families are kept across restarts.
    pub data_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { max_m: DEFAULT_MAX_M, data_dir: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct FitKey {
    version: &'static str,
    method: Method,
    alpha_bits: u64,
}

/// Everything needed to answer queries for one (method, alpha) pair.
pub struct Fitted {
    pub method: Method,
    pub alpha: f64,
    pub m0_hat: Option<usize>,
    pub m0_estimate: usize,
    // None for shortcut methods, which are re-derived per query
    interp: Option<InterpolatedEnvelope>,
    curve: OnceLock<Arc<CachedCurve>>,
}

pub struct CachedCurve {
    pub curve: EnvelopeCurve,
    pub json: String,
}

pub struct Dataset {
    pub id: String,
    pub family: PValueFamily,
    cache: Mutex<HashMap<FitKey, Arc<Fitted>>>,
}

impl Dataset {
    fn new(id: String, family: PValueFamily) -> Self {
        Dataset { id, family, cache: Mutex::new(HashMap::new()) }
    }

    /// Fits `method` at `alpha`, reusing an earlier fit when there is one.
    pub fn fitted(&self, method: Method, alpha: f64) -> Result<Arc<Fitted>> {
        let key = FitKey { version: VERSION, method, alpha_bits: alpha.to_bits() };
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let fit = MethodFit::new(method, &self.family, alpha)?;
        let interp = fit.reference().map(InterpolatedEnvelope::new).transpose()?;
        let fitted = Arc::new(Fitted {
            method,
            alpha,
            m0_hat: fit.m0_hat(),
            m0_estimate: fit.m0_estimate(),
            interp,
            curve: OnceLock::new(),
        });
        // a concurrent fit of the same key may have won; both are identical
        Ok(self.cache.lock().unwrap().entry(key).or_insert(fitted).clone())
    }

    /// Bound on false discoveries in `selection`.
    pub fn bound(&self, fitted: &Fitted, selection: &[usize]) -> Result<usize> {
        match &fitted.interp {
            Some(interp) => interp.bound(selection),
            None => MethodFit::new(fitted.method, &self.family, fitted.alpha)?.bound(selection),
        }
    }

    /// Envelope curve along the p-value order, computed once per fit.
    pub fn curve(&self, fitted: &Fitted) -> Result<Arc<CachedCurve>> {
        if let Some(c) = fitted.curve.get() {
            return Ok(c.clone());
        }
        let curve = match &fitted.interp {
            Some(interp) => {
                let vhat = interp.path(&self.family.sort_order())?;
                EnvelopeCurve::from_path(fitted.method, fitted.alpha, fitted.m0_hat, &self.family, &vhat)
            }
            None => MethodFit::new(fitted.method, &self.family, fitted.alpha)?.curve()?,
        };
        let json = serde_json::to_string(&curve).expect("curves serialize");
        Ok(fitted.curve.get_or_init(|| Arc::new(CachedCurve { curve, json })).clone())
    }
}

/// Shared application state.
pub struct AppState {
    pub config: ServiceConfig,
    datasets: RwLock<HashMap<String, Arc<Dataset>>>,
}

impl AppState {
    /// Opens the store, loading any families kept in the data directory.
    pub fn open(config: ServiceConfig) -> io::Result<Self> {
        let mut datasets = HashMap::new();
        if let Some(dir) = &config.data_dir {
            fs::create_dir_all(dir)?;
            for entry in fs::read_dir(dir)? {
                let path = entry?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else { continue };
                let family = PValueFamily::from_json(&fs::read_to_string(&path)?)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
                datasets.insert(id.clone(), Arc::new(Dataset::new(id, family)));
            }
        }
        Ok(AppState { config, datasets: RwLock::new(datasets) })
    }

    /// In-memory store without persistence.
    pub fn in_memory() -> Self {
        Self::open(ServiceConfig::default()).expect("no directory to read")
    }

    pub fn get(&self, id: &str) -> Option<Arc<Dataset>> {
        self.datasets.read().unwrap().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.datasets.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores `family` under a content-derived id. Returns the dataset and
    /// whether it was new.
    pub fn insert(&self, family: PValueFamily) -> io::Result<(Arc<Dataset>, bool)> {
        let json = family.to_json();
        let id = dataset_id(&json);
        if let Some(existing) = self.get(&id) {
            return Ok((existing, false));
        }
        if let Some(dir) = &self.config.data_dir {
            let tmp = dir.join(format!("{id}.json.tmp"));
            fs::write(&tmp, &json)?;
            fs::rename(&tmp, dir.join(format!("{id}.json")))?;
        }
        let mut map = self.datasets.write().unwrap();
        let ds = map.entry(id.clone()).or_insert_with(|| Arc::new(Dataset::new(id, family))).clone();
        Ok((ds, true))
    }
}

fn dataset_id(canonical_json: &str) -> String {
    let digest = Sha256::digest(canonical_json.as_bytes());
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}
