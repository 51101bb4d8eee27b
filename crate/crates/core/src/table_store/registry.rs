use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::RwLock;

use super::{infer_fields, Dataset, FieldMeta};

/// A registered dataset together with its inferred fields.
#[derive(Debug)]
pub struct RegisteredDataset {
    pub dataset: Dataset,
    pub fields: Vec<FieldMeta>,
}

/// Concurrent id → dataset map. Entries are never replaced or removed.
#[derive(Debug, Default)]
pub struct DatasetRegistry {
    entries: RwLock<HashMap<String, Arc<RegisteredDataset>>>,
    next_id: AtomicU64,
}

impl DatasetRegistry {
    pub fn new() -> DatasetRegistry {
        DatasetRegistry::default()
    }

    /// Assigns the next `ds_N` id, infers fields and stores the dataset.
    pub fn register(&self, dataset: Dataset) -> Arc<RegisteredDataset> {
        let id = format!("ds_{}", self.next_id.fetch_add(1, Ordering::SeqCst) + 1);
        let dataset = dataset.with_id(id.clone());
        let fields = infer_fields(&dataset);
        let entry = Arc::new(RegisteredDataset { dataset, fields });
        self.entries.write().insert(id, Arc::clone(&entry));
        entry
    }

    pub fn get(&self, id: &str) -> Option<Arc<RegisteredDataset>> {
        self.entries.read().get(id).cloned()
    }

    pub fn find_by_name(&self, name: &str) -> Option<Arc<RegisteredDataset>> {
        let entries = self.entries.read();
        let mut matches: Vec<_> = entries
            .values()
            .filter(|e| e.dataset.name() == name)
            .cloned()
            .collect();
        matches.sort_by(|a, b| a.dataset.id().cmp(b.dataset.id()));
        matches.into_iter().next()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<_> = self.entries.read().keys().cloned().collect();
        ids.sort_by_key(|id| id.trim_start_matches("ds_").parse::<u64>().unwrap_or(u64::MAX));
        ids
    }
}
