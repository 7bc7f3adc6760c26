use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{CandidateSql, TranslateError};

/// Cache key: database id plus the normalized query text, compared bytewise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryCacheKey {
    pub database_id: String,
    pub normalized: String,
}

impl QueryCacheKey {
    pub fn new(database_id: &str, normalized: &str) -> Self {
        QueryCacheKey { database_id: database_id.to_string(), normalized: normalized.to_string() }
    }
}

/// Durable backing for cached translations.
pub trait CacheStore: Send + Sync {
    fn load(&self, key: &QueryCacheKey) -> Option<CandidateSql>;
    fn save(&self, key: &QueryCacheKey, candidate: &CandidateSql);
}

type Slot = Arc<Mutex<Option<CandidateSql>>>;

/// Single-flight translation cache.
///
/// Concurrent callers with the same key wait on one slot, so the inner
/// translator runs at most once per key. Failures are not cached.
#[derive(Default)]
pub struct QueryCache {
    slots: Mutex<HashMap<QueryCacheKey, Slot>>,
    store: Option<Arc<dyn CacheStore>>,
}

impl QueryCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// A cache that reads through to and writes through to `store`.
    pub fn with_store(store: Arc<dyn CacheStore>) -> Self {
        QueryCache { slots: Mutex::default(), store: Some(store) }
    }

    pub fn cached_translate(
        &self,
        key: &QueryCacheKey,
        inner: impl FnOnce() -> Result<CandidateSql, TranslateError>,
    ) -> Result<CandidateSql, TranslateError> {
        let slot = {
            let mut slots = self.slots.lock().expect("cache lock poisoned");
            slots.entry(key.clone()).or_default().clone()
        };
        let mut guard = slot.lock().expect("cache slot poisoned");
        if let Some(hit) = guard.as_ref() {
            return Ok(CandidateSql { from_cache: true, ..hit.clone() });
        }
        if let Some(stored) = self.store.as_ref().and_then(|s| s.load(key)) {
            *guard = Some(CandidateSql { from_cache: false, ..stored.clone() });
            return Ok(CandidateSql { from_cache: true, ..stored });
        }
        let fresh = inner()?;
        let stored = CandidateSql { from_cache: false, ..fresh.clone() };
        if let Some(s) = &self.store {
            s.save(key, &stored);
        }
        *guard = Some(stored);
        Ok(CandidateSql { from_cache: false, ..fresh })
    }

    pub fn len(&self) -> usize {
        let slots = self.slots.lock().expect("cache lock poisoned");
        slots.values().filter(|s| s.lock().map(|g| g.is_some()).unwrap_or(false)).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
