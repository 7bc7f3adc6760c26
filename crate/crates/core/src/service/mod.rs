//! The end-to-end pipeline behind the HTTP API, the CLI and the C ABI.

mod history;
pub mod http;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use chrono::NaiveDateTime;
use rusqlite::{Connection, OpenFlags};
use serde::Serialize;
use thiserror::Error;

pub use history::{HistoryEntry, HistoryStore, HISTORY_PAGE_SIZE};

use crate::executor::{execute, ExecuteError, ExecutorConfig, ResultTable};
use crate::explain::{explain, Explanation};
use crate::onboarding::{onboard_database, quote, OnboardedDatabase, OnboardingConfig, OnboardingError, Source};
use crate::resolver::{resolve, Lexicon, Replacement, ResolveError, ValueIndex, ValueIndexCache, ValueIndexProvider};
use crate::sql::{parse, SqlError};
use crate::temporal::normalize_query;
use crate::translator::{QueryCache, QueryCacheKey, TranslateError, Translator};
use crate::viz::{recommend, ChartSpec, VizConfig, VizError};

const DBS_DIR: &str = "dbs";
const STAGING_DIR: &str = "staging";
const HISTORY_FILE: &str = "history.sqlite";
/// Most distinct values read from one column for placeholder matching.
const VALUE_SCAN_LIMIT: usize = 100_000;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown database {0:?}")]
    UnknownDatabase(String),
    #[error("unknown or expired result {0:?}; please run the query again")]
    UnknownResult(String),
    #[error("translation backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("could not translate the question; please check the query again")]
    NoTranslation,
    #[error("unsupported SQL construct: {construct}")]
    UnsupportedSyntax { construct: String },
    #[error("invalid SQL: {0}")]
    InvalidSql(SqlError),
    #[error("statement rejected: {0}")]
    Rejected(String),
    #[error("onboarding failed: {0}")]
    Onboarding(#[from] OnboardingError),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("execution failed: {0}")]
    Execution(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    /// Stable machine-readable name for API clients.
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::UnknownDatabase(_) => "unknown_database",
            ServiceError::UnknownResult(_) => "unknown_result",
            ServiceError::BackendUnavailable(_) => "backend_unavailable",
            ServiceError::NoTranslation => "no_translation",
            ServiceError::UnsupportedSyntax { .. } => "unsupported_syntax",
            ServiceError::InvalidSql(_) => "invalid_sql",
            ServiceError::Rejected(_) => "rejected_statement",
            ServiceError::Onboarding(_) => "onboarding_failed",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Execution(_) => "execution_failed",
            ServiceError::Internal(_) => "internal",
        }
    }
}

impl From<SqlError> for ServiceError {
    fn from(e: SqlError) -> Self {
        match e {
            SqlError::UnsupportedSyntax { construct, .. } => ServiceError::UnsupportedSyntax { construct },
            other => ServiceError::InvalidSql(other),
        }
    }
}

impl From<TranslateError> for ServiceError {
    fn from(e: TranslateError) -> Self {
        match e {
            TranslateError::BackendUnavailable(m) => ServiceError::BackendUnavailable(m),
            TranslateError::NoTranslation(_) => ServiceError::NoTranslation,
            TranslateError::InvalidSql(e) => e.into(),
        }
    }
}

impl From<ResolveError> for ServiceError {
    fn from(e: ResolveError) -> Self {
        match e {
            ResolveError::Sql(e) => e.into(),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

impl From<ExecuteError> for ServiceError {
    fn from(e: ExecuteError) -> Self {
        match e {
            ExecuteError::RejectedStatement(m) => ServiceError::Rejected(m),
            ExecuteError::Sql(e) => e.into(),
            other => ServiceError::Execution(other.to_string()),
        }
    }
}

impl From<VizError> for ServiceError {
    fn from(e: VizError) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

impl From<rusqlite::Error> for ServiceError {
    fn from(e: rusqlite::Error) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub data_dir: PathBuf,
    pub executor: ExecutorConfig,
    pub viz: VizConfig,
    pub result_ttl: Duration,
    /// Cap on distinct values held by the placeholder value indexes.
    pub value_cache_max: usize,
}

impl EngineConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        EngineConfig {
            data_dir: data_dir.into(),
            executor: ExecutorConfig::default(),
            viz: VizConfig::default(),
            result_ttl: Duration::from_secs(60 * 60),
            value_cache_max: ValueIndexCache::DEFAULT_MAX_VALUES,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryResponse {
    pub result_id: String,
    pub database_id: String,
    pub query: String,
    pub normalized_query: String,
    pub sql: String,
    pub explanation: String,
    pub explanation_parts: Explanation,
    pub result: ResultTable,
    pub visualizations: Vec<ChartSpec>,
    pub replacements: Vec<Replacement>,
    pub warnings: Vec<String>,
    pub backend_id: String,
    pub from_cache: bool,
}

struct StoredResult {
    table: Arc<ResultTable>,
    charts: Vec<ChartSpec>,
    expires: Instant,
}

/// Reads distinct column values straight from the store.
struct StoreValues<'a> {
    db: &'a OnboardedDatabase,
    cache: &'a ValueIndexCache,
}

impl ValueIndexProvider for StoreValues<'_> {
    fn index(&self, table: &str, column: &str) -> Result<Arc<ValueIndex>, ResolveError> {
        self.cache.get_or_build(&self.db.id, table, column, || {
            let fail = |e: rusqlite::Error| ResolveError::Values {
                table: table.to_string(),
                column: column.to_string(),
                message: e.to_string(),
            };
            let conn = Connection::open_with_flags(&self.db.store_path, OpenFlags::SQLITE_OPEN_READ_ONLY)
                .map_err(fail)?;
            let sql = format!(
                "SELECT DISTINCT {c} FROM {t} WHERE {c} IS NOT NULL LIMIT {VALUE_SCAN_LIMIT}",
                c = quote(column),
                t = quote(table)
            );
            let mut stmt = conn.prepare(&sql).map_err(fail)?;
            let values = stmt
                .query_map([], |r| Ok(crate::value::Value::from(r.get_ref(0)?).to_string()))
                .map_err(fail)?
                .collect::<Result<Vec<String>, _>>()
                .map_err(fail)?;
            Ok(values)
        })
    }
}

/// Owns onboarded databases, the translation cache, history and recent
/// results. Safe to share across threads.
pub struct Engine {
    config: EngineConfig,
    translator: Arc<dyn Translator>,
    history: Arc<HistoryStore>,
    cache: QueryCache,
    databases: RwLock<BTreeMap<String, Arc<OnboardedDatabase>>>,
    results: Mutex<HashMap<String, StoredResult>>,
    lexicon: Lexicon,
    value_indexes: ValueIndexCache,
}

impl Engine {
    /// Opens (or creates) a data directory and loads every database
    /// onboarded into it earlier.
    pub fn open(config: EngineConfig, translator: Arc<dyn Translator>) -> Result<Self, ServiceError> {
        let dbs = config.data_dir.join(DBS_DIR);
        std::fs::create_dir_all(&dbs)?;
        let history = Arc::new(HistoryStore::open(&config.data_dir.join(HISTORY_FILE))?);
        let mut databases = BTreeMap::new();
        for entry in std::fs::read_dir(&dbs)? {
            let dir = entry?.path();
            if let Ok(db) = OnboardedDatabase::load(&dir) {
                databases.insert(db.id.clone(), Arc::new(db));
            }
        }
        Ok(Engine {
            cache: QueryCache::with_store(history.clone()),
            value_indexes: ValueIndexCache::new(config.value_cache_max),
            config,
            translator,
            history,
            databases: RwLock::new(databases),
            results: Mutex::default(),
            lexicon: Lexicon::builtin(),
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Onboards into a staging directory and publishes the database only
    /// once it is complete, so queries never see a half-written store.
    pub fn onboard(&self, source: &Source, config: &OnboardingConfig) -> Result<OnboardedDatabase, ServiceError> {
        let staging = self.config.data_dir.join(STAGING_DIR).join(uuid::Uuid::new_v4().simple().to_string());
        let result = onboard_database(source, config, &staging);
        let mut db = match result {
            Ok(db) => db,
            Err(e) => {
                let _ = std::fs::remove_dir_all(&staging);
                return Err(e.into());
            }
        };
        let dest = self.config.data_dir.join(DBS_DIR).join(&db.id);
        std::fs::rename(&staging, &dest)?;
        db.store_path = dest.join(crate::onboarding::STORE_FILE);
        self.databases.write().expect("database map poisoned").insert(db.id.clone(), Arc::new(db.clone()));
        Ok(db)
    }

    pub fn databases(&self) -> Vec<Arc<OnboardedDatabase>> {
        self.databases.read().expect("database map poisoned").values().cloned().collect()
    }

    pub fn database(&self, id: &str) -> Result<Arc<OnboardedDatabase>, ServiceError> {
        self.databases
            .read()
            .expect("database map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownDatabase(id.to_string()))
    }

    /// Runs the whole pipeline for one question.
    ///
    /// Unresolved placeholders do not fail the request: the statement still
    /// runs and the warnings travel with the response.
    pub fn query(
        &self,
        database_id: &str,
        text: &str,
        reference_time: Option<NaiveDateTime>,
    ) -> Result<QueryResponse, ServiceError> {
        let db = self.database(database_id)?;
        let reference_time = reference_time.unwrap_or_else(|| chrono::Local::now().naive_local());
        let normalized = normalize_query(text, reference_time);
        let key = QueryCacheKey::new(&db.id, &normalized.normalized);
        let candidate = self.cache.cached_translate(&key, || self.translator.translate(&normalized, &db))?;

        let values = StoreValues { db: &db, cache: &self.value_indexes };
        let resolution = resolve(&normalized, &candidate, &db, &values, &self.lexicon)?;
        let parsed = parse(&resolution.sql, &db)?;
        let result = execute(&resolution.sql, &db, &self.config.executor)?;
        let explanation = explain(&parsed);
        let charts = recommend(&result, &self.config.viz)?;

        let result_id = uuid::Uuid::new_v4().simple().to_string();
        self.store_result(&result_id, &result, &charts);
        self.history.append(HistoryEntry {
            id: 0,
            database_id: db.id.clone(),
            raw_query: text.to_string(),
            normalized_query: normalized.normalized.clone(),
            resolved_sql: resolution.sql.clone(),
            explanation: explanation.to_string(),
            timestamp: chrono::Utc::now(),
            warnings: resolution.warnings.clone(),
        })?;
        Ok(QueryResponse {
            result_id,
            database_id: db.id.clone(),
            query: text.to_string(),
            normalized_query: normalized.normalized,
            sql: resolution.sql,
            explanation: explanation.to_string(),
            explanation_parts: explanation,
            result,
            visualizations: charts,
            replacements: resolution.replacements,
            warnings: resolution.warnings,
            backend_id: candidate.backend_id,
            from_cache: candidate.from_cache,
        })
    }

    pub fn history(&self, database_id: &str, page: usize) -> Result<Vec<HistoryEntry>, ServiceError> {
        self.database(database_id)?;
        Ok(self.history.page(database_id, page)?)
    }

    fn store_result(&self, id: &str, table: &ResultTable, charts: &[ChartSpec]) {
        let now = Instant::now();
        let mut results = self.results.lock().expect("result map poisoned");
        results.retain(|_, r| r.expires > now);
        results.insert(
            id.to_string(),
            StoredResult { table: Arc::new(table.clone()), charts: charts.to_vec(), expires: now + self.config.result_ttl },
        );
    }

    fn stored<T>(&self, id: &str, f: impl FnOnce(&StoredResult) -> T) -> Result<T, ServiceError> {
        let results = self.results.lock().expect("result map poisoned");
        match results.get(id) {
            Some(r) if r.expires > Instant::now() => Ok(f(r)),
            _ => Err(ServiceError::UnknownResult(id.to_string())),
        }
    }

    pub fn result(&self, id: &str) -> Result<Arc<ResultTable>, ServiceError> {
        self.stored(id, |r| r.table.clone())
    }

    pub fn result_visualizations(&self, id: &str) -> Result<Vec<ChartSpec>, ServiceError> {
        self.stored(id, |r| r.charts.clone())
    }

    pub fn result_csv(&self, id: &str) -> Result<Vec<u8>, ServiceError> {
        let table = self.result(id)?;
        Ok(crate::executor::export_csv(&table))
    }

    /// Where an upload should be staged before onboarding.
    pub fn upload_path(&self, file_name: &str) -> Result<PathBuf, ServiceError> {
        let dir = self.config.data_dir.join("uploads").join(uuid::Uuid::new_v4().simple().to_string());
        std::fs::create_dir_all(&dir)?;
        let name = Path::new(file_name)
            .file_name()
            .and_then(|n| n.to_str())
            .filter(|n| !n.is_empty())
            .unwrap_or("upload");
        Ok(dir.join(name))
    }
}
