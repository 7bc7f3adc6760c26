use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{candidate, CandidateSql, TranslateError, Translator};
use crate::onboarding::{DataType, OnboardedDatabase};
use crate::temporal::NormalizedQuery;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnPayload {
    pub name: String,
    #[serde(rename = "type")]
    pub data_type: DataType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablePayload {
    pub name: String,
    pub columns: Vec<ColumnPayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaPayload {
    pub tables: Vec<TablePayload>,
}

impl From<&OnboardedDatabase> for SchemaPayload {
    fn from(db: &OnboardedDatabase) -> Self {
        SchemaPayload {
            tables: db
                .tables
                .iter()
                .map(|t| TablePayload {
                    name: t.name.clone(),
                    columns: t
                        .columns
                        .iter()
                        .map(|c| ColumnPayload { name: c.cleaned_name.clone(), data_type: c.data_type })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Body of `POST /translate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub query: String,
    pub schema: SchemaPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub sql: String,
}

/// HTTP client for a model server exposing `POST /translate`.
pub struct RemoteTranslator {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteTranslator {
    pub const ID: &'static str = "remote";
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

    /// `base_url` is the server root, e.g. `http://127.0.0.1:8000`.
    pub fn new(base_url: &str) -> Self {
        Self::with_timeout(base_url, Self::DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Self {
        RemoteTranslator {
            endpoint: format!("{}/translate", base_url.trim_end_matches('/')),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl Translator for RemoteTranslator {
    fn backend_id(&self) -> &str {
        Self::ID
    }

    fn translate(
        &self,
        query: &NormalizedQuery,
        schema: &OnboardedDatabase,
    ) -> Result<CandidateSql, TranslateError> {
        let request = TranslateRequest {
            query: query.normalized.clone(),
            schema: SchemaPayload::from(schema),
        };
        let response = self
            .agent
            .post(&self.endpoint)
            .send_json(&request)
            .map_err(|e| TranslateError::BackendUnavailable(e.to_string()))?;
        let body: TranslateResponse = response
            .into_json()
            .map_err(|e| TranslateError::BackendUnavailable(format!("malformed response: {e}")))?;
        candidate(body.sql, Self::ID)
    }
}
