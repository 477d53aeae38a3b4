//! In-memory identify cache with per-entry TTL.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};

use crate::model::ConsolidatedIdentity;

/// Normalized address plus the threshold the lookup ran with.
pub type CacheKey = (String, u32);

#[derive(Debug, Clone)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub value: Arc<ConsolidatedIdentity>,
    pub stored_at: DateTime<Utc>,
    pub ttl_s: u64,
}

impl CacheEntry {
    pub fn is_fresh(&self, now: DateTime<Utc>) -> bool {
        let age = now.signed_duration_since(self.stored_at);
        age.num_milliseconds() < (self.ttl_s as i64).saturating_mul(1000)
    }
}

#[derive(Debug)]
pub struct ResponseCache {
    entries: RwLock<HashMap<CacheKey, CacheEntry>>,
    ttl_s: u64,
}

impl ResponseCache {
    pub fn new(ttl_s: u64) -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            ttl_s: ttl_s.max(1),
        }
    }

    pub fn ttl_s(&self) -> u64 {
        self.ttl_s
    }

    pub fn get(&self, key: &CacheKey, now: DateTime<Utc>) -> Option<Arc<ConsolidatedIdentity>> {
        {
            let entries = self.entries.read().unwrap_or_else(|e| e.into_inner());
            match entries.get(key) {
                Some(entry) if entry.is_fresh(now) => return Some(Arc::clone(&entry.value)),
                None => return None,
                Some(_) => {}
            }
        }
        // Stale; drop it unless someone refreshed it meanwhile.
        let mut entries = self.entries.write().unwrap_or_else(|e| e.into_inner());
        if entries.get(key).is_some_and(|e| !e.is_fresh(now)) {
            entries.remove(key);
        }
        None
    }

    pub fn put(&self, key: CacheKey, value: Arc<ConsolidatedIdentity>, now: DateTime<Utc>) {
        let entry = CacheEntry {
            key: key.clone(),
            value,
            stored_at: now,
            ttl_s: self.ttl_s,
        };
        self.entries
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, entry);
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
