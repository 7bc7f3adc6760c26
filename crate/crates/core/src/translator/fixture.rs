use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{candidate, CandidateSql, TranslateError, Translator};
use crate::onboarding::OnboardedDatabase;
use crate::temporal::NormalizedQuery;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    /// Exact normalized query text.
    pub pattern: String,
    pub sql: String,
}

/// Deterministic backend: a lookup table from normalized query text to SQL.
#[derive(Debug, Clone, Default)]
pub struct FixtureTranslator {
    entries: HashMap<String, String>,
}

impl FixtureTranslator {
    pub const ID: &'static str = "fixture";

    pub fn new(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        FixtureTranslator {
            entries: entries.into_iter().map(|e| (e.pattern, e.sql)).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let entries: Vec<FixtureEntry> = serde_json::from_str(text)?;
        Ok(Self::new(entries))
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Translator for FixtureTranslator {
    fn backend_id(&self) -> &str {
        Self::ID
    }

    fn translate(
        &self,
        query: &NormalizedQuery,
        _schema: &OnboardedDatabase,
    ) -> Result<CandidateSql, TranslateError> {
        match self.entries.get(&query.normalized) {
            Some(sql) => candidate(sql.clone(), Self::ID),
            None => Err(TranslateError::NoTranslation(query.normalized.clone())),
        }
    }
}
