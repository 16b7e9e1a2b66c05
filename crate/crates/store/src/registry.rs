//! District registry and name search.

use std::cmp::Ordering;

use esid_core::graph::District;
use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Result, StoreError};

pub const MAX_MATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistrictMatch {
    pub id: String,
    pub name: String,
}

/// Lower-cases and strips diacritics, so that "Köln" and "koln" compare equal.
pub fn fold(s: &str) -> String {
    s.nfkd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect::<String>()
        .replace('ß', "ss")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistrictRegistry {
    entries: Vec<RegistryEntry>,
}

impl DistrictRegistry {
    pub fn new(entries: Vec<RegistryEntry>) -> Self {
        let mut r = Self::default();
        for e in entries {
            r.upsert(e);
        }
        r
    }

    pub fn from_districts<'a>(districts: impl IntoIterator<Item = &'a District>) -> Self {
        Self::new(
            districts
                .into_iter()
                .map(|d| RegistryEntry { id: d.id.clone(), name: d.name.clone() })
                .collect(),
        )
    }

    /// Inserts or renames, keeping entries sorted by id.
    pub fn upsert(&mut self, entry: RegistryEntry) {
        match self.entries.binary_search_by(|e| e.id.cmp(&entry.id)) {
            Ok(i) => self.entries[i] = entry,
            Err(i) => self.entries.insert(i, entry),
        }
    }

    pub fn get(&self, id: &str) -> Option<&RegistryEntry> {
        self.entries
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some()
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Case- and diacritic-insensitive search over names, plus prefix search
    /// over ids. Exact id hits come first, then prefix matches, then
    /// substring matches; ties are ordered by name.
    pub fn search(&self, query: &str) -> Result<Vec<DistrictMatch>> {
        let q = query.trim();
        if q.is_empty() {
            return Err(StoreError::QueryTooShort);
        }
        let folded = fold(q);
        let mut hits: Vec<(u8, String, &RegistryEntry)> = self
            .entries
            .iter()
            .filter_map(|e| {
                let name = fold(&e.name);
                let rank = if e.id == q {
                    0
                } else if e.id.starts_with(q) || name.starts_with(&folded) {
                    1
                } else if name.contains(&folded) {
                    2
                } else {
                    return None;
                };
                Some((rank, name, e))
            })
            .collect();
        hits.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then_with(|| a.1.cmp(&b.1))
                .then_with(|| a.2.name.cmp(&b.2.name))
                .then_with(|| a.2.id.cmp(&b.2.id))
                .then(Ordering::Equal)
        });
        Ok(hits
            .into_iter()
            .take(MAX_MATCHES)
            .map(|(_, _, e)| DistrictMatch { id: e.id.clone(), name: e.name.clone() })
            .collect())
    }
}
