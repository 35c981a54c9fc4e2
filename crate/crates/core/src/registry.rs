//! Name-keyed registries for the interchangeable strategies of the pipeline.
//!
//! Ansatz families, problem encodings and CVaR estimators are each exposed
//! as a trait object. Configuration files and the CLI refer to them by name;
//! the registry resolves the name at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Arc<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers `item` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: impl Into<String>, item: Arc<T>) -> &mut Self {
        self.entries.insert(name.into(), item);
        self
    }

    /// Adds an extra name for an existing entry.
    pub fn alias(&mut self, alias: impl Into<String>, target: &str) -> &mut Self {
        if let Some(item) = self.entries.get(target).cloned() {
            self.entries.insert(alias.into(), item);
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
