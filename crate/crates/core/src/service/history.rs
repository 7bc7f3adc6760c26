use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use rusqlite::{params, Connection, OptionalExtension};
use serde::{Deserialize, Serialize};

use crate::translator::{CacheStore, CandidateSql, QueryCacheKey};

pub const HISTORY_PAGE_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub id: i64,
    pub database_id: String,
    pub raw_query: String,
    pub normalized_query: String,
    pub resolved_sql: String,
    pub explanation: String,
    pub timestamp: DateTime<Utc>,
    pub warnings: Vec<String>,
}

/// Query history and translated SQL, in one SQLite file next to the
/// onboarded databases. Writes go through a single connection, so appends
/// are serialized.
pub struct HistoryStore {
    conn: Mutex<Connection>,
}

impl HistoryStore {
    pub fn open(path: &Path) -> rusqlite::Result<Self> {
        let conn = Connection::open(path)?;
        conn.execute_batch(
            "PRAGMA journal_mode = WAL;
             CREATE TABLE IF NOT EXISTS history (
                 id INTEGER PRIMARY KEY AUTOINCREMENT,
                 database_id TEXT NOT NULL,
                 raw_query TEXT NOT NULL,
                 normalized_query TEXT NOT NULL,
                 resolved_sql TEXT NOT NULL,
                 explanation TEXT NOT NULL,
                 timestamp TEXT NOT NULL,
                 warnings TEXT NOT NULL
             );
             CREATE INDEX IF NOT EXISTS history_by_db ON history (database_id, id);
             CREATE TABLE IF NOT EXISTS translations (
                 database_id TEXT NOT NULL,
                 normalized TEXT NOT NULL,
                 sql TEXT NOT NULL,
                 backend_id TEXT NOT NULL,
                 PRIMARY KEY (database_id, normalized)
             );",
        )?;
        Ok(HistoryStore { conn: Mutex::new(conn) })
    }

    /// Appends an entry; its id and timestamp are assigned here. Timestamps
    /// never go backwards within a database.
    pub fn append(&self, mut entry: HistoryEntry) -> rusqlite::Result<HistoryEntry> {
        let conn = self.conn.lock().expect("history lock poisoned");
        let last: Option<String> = conn
            .query_row(
                "SELECT timestamp FROM history WHERE database_id = ?1 ORDER BY id DESC LIMIT 1",
                [&entry.database_id],
                |r| r.get(0),
            )
            .optional()?;
        let now = Utc::now();
        entry.timestamp = match last.and_then(|t| DateTime::parse_from_rfc3339(&t).ok()) {
            Some(prev) if prev.with_timezone(&Utc) > now => prev.with_timezone(&Utc),
            _ => now,
        };
        conn.execute(
            "INSERT INTO history (database_id, raw_query, normalized_query, resolved_sql, explanation, timestamp, warnings)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            params![
                entry.database_id,
                entry.raw_query,
                entry.normalized_query,
                entry.resolved_sql,
                entry.explanation,
                entry.timestamp.to_rfc3339(),
                serde_json::to_string(&entry.warnings).expect("strings serialize"),
            ],
        )?;
        entry.id = conn.last_insert_rowid();
        Ok(entry)
    }

    /// Newest first; pages count from 1.
    pub fn page(&self, database_id: &str, page: usize) -> rusqlite::Result<Vec<HistoryEntry>> {
        let offset = page.saturating_sub(1).saturating_mul(HISTORY_PAGE_SIZE);
        let conn = self.conn.lock().expect("history lock poisoned");
        let mut stmt = conn.prepare(
            "SELECT id, database_id, raw_query, normalized_query, resolved_sql, explanation, timestamp, warnings
             FROM history WHERE database_id = ?1 ORDER BY id DESC LIMIT ?2 OFFSET ?3",
        )?;
        let rows = stmt.query_map(params![database_id, HISTORY_PAGE_SIZE as i64, offset as i64], |r| {
            let ts: String = r.get(6)?;
            let warnings: String = r.get(7)?;
            Ok(HistoryEntry {
                id: r.get(0)?,
                database_id: r.get(1)?,
                raw_query: r.get(2)?,
                normalized_query: r.get(3)?,
                resolved_sql: r.get(4)?,
                explanation: r.get(5)?,
                timestamp: DateTime::parse_from_rfc3339(&ts).map(|t| t.with_timezone(&Utc)).unwrap_or_default(),
                warnings: serde_json::from_str(&warnings).unwrap_or_default(),
            })
        })?;
        rows.collect()
    }

    pub fn forget_database(&self, database_id: &str) -> rusqlite::Result<()> {
        let conn = self.conn.lock().expect("history lock poisoned");
        conn.execute("DELETE FROM history WHERE database_id = ?1", [database_id])?;
        conn.execute("DELETE FROM translations WHERE database_id = ?1", [database_id])?;
        Ok(())
    }
}

impl CacheStore for HistoryStore {
    fn load(&self, key: &QueryCacheKey) -> Option<CandidateSql> {
        let conn = self.conn.lock().ok()?;
        conn.query_row(
            "SELECT sql, backend_id FROM translations WHERE database_id = ?1 AND normalized = ?2",
            params![key.database_id, key.normalized],
            |r| Ok(CandidateSql { sql: r.get(0)?, backend_id: r.get(1)?, from_cache: true }),
        )
        .optional()
        .ok()
        .flatten()
    }

    fn save(&self, key: &QueryCacheKey, candidate: &CandidateSql) {
        if let Ok(conn) = self.conn.lock() {
            // A failed write only costs a future cache miss.
            let _ = conn.execute(
                "INSERT OR REPLACE INTO translations (database_id, normalized, sql, backend_id) VALUES (?1, ?2, ?3, ?4)",
                params![key.database_id, key.normalized, candidate.sql, candidate.backend_id],
            );
        }
    }
}
