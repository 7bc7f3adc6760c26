//! Natural-language-to-SQL backends and the query cache in front of them.

mod cache;
mod fixture;
mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CacheStore, QueryCache, QueryCacheKey};
pub use fixture::{FixtureEntry, FixtureTranslator};
pub use remote::{RemoteTranslator, SchemaPayload, TranslateRequest, TranslateResponse};

use crate::onboarding::OnboardedDatabase;
use crate::sql::{tokenize, SqlError};
use crate::temporal::NormalizedQuery;

/// SQL produced by a backend. May still contain `'Terminal'` placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSql {
    pub sql: String,
    pub backend_id: String,
    pub from_cache: bool,
}

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("translation backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("no translation for {0:?}; please check the query again")]
    NoTranslation(String),
    #[error("backend returned SQL that does not tokenize: {0}")]
    InvalidSql(#[from] SqlError),
}

pub trait Translator: Send + Sync {
    fn backend_id(&self) -> &str;

    fn translate(
        &self,
        query: &NormalizedQuery,
        schema: &OnboardedDatabase,
    ) -> Result<CandidateSql, TranslateError>;
}

fn candidate(sql: String, backend_id: &str) -> Result<CandidateSql, TranslateError> {
    if sql.trim().is_empty() {
        return Err(TranslateError::NoTranslation(String::new()));
    }
    tokenize(&sql)?;
    Ok(CandidateSql { sql, backend_id: backend_id.to_string(), from_cache: false })
}
