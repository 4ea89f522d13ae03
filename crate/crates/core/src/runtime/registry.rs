use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use super::backend::{
    Backend, BackendDescriptor, Execution, ReferenceOracleBackend, StatevectorBackend,
};
use super::RuntimeError;

/// Entries kept per backend before the cache is cleared.
const CACHE_CAPACITY: usize = 256;

/// A backend plus its driver-side state.
pub(crate) struct Entry {
    pub(crate) backend: Arc<dyn Backend>,
    cache: Mutex<HashMap<String, Arc<Execution>>>,
}

impl Entry {
    pub(crate) fn cached(&self, key: &str) -> Option<Arc<Execution>> {
        self.cache.lock().ok()?.get(key).cloned()
    }

    pub(crate) fn store(&self, key: String, exec: Arc<Execution>) {
        if let Ok(mut c) = self.cache.lock() {
            if c.len() >= CACHE_CAPACITY {
                c.clear();
            }
            c.insert(key, exec);
        }
    }
}

/// Backends by id. Lookups take a shared lock; registration an exclusive one.
#[derive(Default)]
pub struct Registry {
    entries: RwLock<BTreeMap<String, Arc<Entry>>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `reference-oracle` and `vqpu0`.
    pub fn with_defaults() -> Self {
        let r = Self::empty();
        r.register_backend(Arc::new(StatevectorBackend::new("vqpu0")))
            .and_then(|_| r.register_backend(Arc::new(ReferenceOracleBackend::new("reference-oracle"))))
            .expect("default ids are distinct");
        r
    }

    pub fn register_backend(&self, backend: Arc<dyn Backend>) -> Result<(), RuntimeError> {
        let id = backend.descriptor().id.clone();
        let mut map = self.entries.write().unwrap_or_else(|e| e.into_inner());
        if map.contains_key(&id) {
            return Err(RuntimeError::DuplicateBackend(id));
        }
        map.insert(
            id,
            Arc::new(Entry {
                backend,
                cache: Mutex::new(HashMap::new()),
            }),
        );
        Ok(())
    }

    /// Sorted by id.
    pub fn list_backends(&self) -> Vec<BackendDescriptor> {
        self.entries
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .map(|e| e.backend.descriptor().clone())
            .collect()
    }

    pub fn descriptor(&self, id: &str) -> Option<BackendDescriptor> {
        self.entry(id).map(|e| e.backend.descriptor().clone())
    }

    pub(crate) fn entry(&self, id: &str) -> Option<Arc<Entry>> {
        self.entries
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
    }
}
