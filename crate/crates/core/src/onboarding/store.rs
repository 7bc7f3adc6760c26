use std::path::{Path, PathBuf};

use rusqlite::{Connection, OpenFlags};

use super::{ColumnMeta, DataType, OnboardingConfig, OnboardingError};
use crate::value::Value;

/// An ingestible database: a single-table csv file or a SQLite main file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Csv(PathBuf),
    Sqlite(PathBuf),
}

impl Source {
    /// Picks the format from the SQLite magic header, falling back to csv.
    pub fn detect(path: impl Into<PathBuf>) -> Result<Self, OnboardingError> {
        let path = path.into();
        let mut header = [0u8; 16];
        let is_sqlite = {
            use std::io::Read;
            let mut f = std::fs::File::open(&path)?;
            f.read(&mut header)? == 16 && &header == b"SQLite format 3\0"
        };
        Ok(if is_sqlite { Source::Sqlite(path) } else { Source::Csv(path) })
    }

    pub fn path(&self) -> &Path {
        match self {
            Source::Csv(p) | Source::Sqlite(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

pub fn load_source(source: &Source, config: &OnboardingConfig) -> Result<Vec<RawTable>, OnboardingError> {
    match source {
        Source::Csv(path) => {
            let name = match &config.table_name {
                Some(n) => n.clone(),
                None => path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| OnboardingError::Source(format!("no table name for {}", path.display())))?
                    .to_string(),
            };
            Ok(vec![read_csv(path, name)?])
        }
        Source::Sqlite(path) => read_sqlite(path),
    }
}

fn read_csv(path: &Path, name: String) -> Result<RawTable, OnboardingError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let columns: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if columns.is_empty() {
        return Err(OnboardingError::Source("csv has no header row".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(Value::infer).collect());
    }
    Ok(RawTable { name, columns, rows })
}

fn read_sqlite(path: &Path) -> Result<Vec<RawTable>, OnboardingError> {
    let conn = Connection::open_with_flags(path, OpenFlags::SQLITE_OPEN_READ_ONLY)?;
    let names: Vec<String> = conn
        .prepare(
            "SELECT name FROM sqlite_master WHERE type = 'table' \
             AND name NOT LIKE 'sqlite_%' ORDER BY name",
        )?
        .query_map([], |r| r.get(0))?
        .collect::<Result<_, _>>()?;
    let mut tables = Vec::new();
    for name in names {
        let mut stmt = conn.prepare(&format!("SELECT * FROM {}", quote(&name)))?;
        let columns: Vec<String> = stmt.column_names().iter().map(|c| c.to_string()).collect();
        let n = columns.len();
        let rows = stmt
            .query_map([], |r| (0..n).map(|i| r.get_ref(i).map(Value::from)).collect())?
            .collect::<Result<Vec<Vec<Value>>, _>>()?;
        tables.push(RawTable { name, columns, rows });
    }
    if tables.is_empty() {
        return Err(OnboardingError::Source("database has no tables".into()));
    }
    Ok(tables)
}

/// Numeric when every non-null cell is a number, textual otherwise.
pub(crate) fn infer_type(values: &[Value]) -> DataType {
    let numeric = values
        .iter()
        .filter(|v| !v.is_null())
        .all(|v| matches!(v, Value::Integer(_) | Value::Real(_)));
    if numeric {
        DataType::Numeric
    } else {
        DataType::Textual
    }
}

pub(super) fn as_text(v: Value) -> Value {
    match v {
        Value::Integer(_) | Value::Real(_) => Value::Text(v.to_string()),
        other => other,
    }
}

pub(crate) fn quote(ident: &str) -> String {
    format!("\"{}\"", ident.replace('"', "\"\""))
}

pub(super) fn write_store(
    path: &Path,
    tables: &[(String, Vec<ColumnMeta>, Vec<Vec<Value>>)],
) -> Result<(), OnboardingError> {
    if path.exists() {
        std::fs::remove_file(path)?;
    }
    let mut conn = Connection::open(path)?;
    let tx = conn.transaction()?;
    for (name, columns, data) in tables {
        let defs: Vec<String> = columns
            .iter()
            .zip(data)
            .map(|(c, values)| {
                let ty = match c.data_type {
                    DataType::Numeric if values.iter().all(|v| matches!(v, Value::Integer(_) | Value::Null)) => "INTEGER",
                    DataType::Numeric => "REAL",
                    DataType::Textual | DataType::Datetime => "TEXT",
                };
                format!("{} {ty}", quote(&c.cleaned_name))
            })
            .collect();
        tx.execute(&format!("CREATE TABLE {} ({})", quote(name), defs.join(", ")), [])?;
        let placeholders = vec!["?"; columns.len()].join(", ");
        let mut insert = tx.prepare(&format!("INSERT INTO {} VALUES ({placeholders})", quote(name)))?;
        let rows = data.first().map_or(0, Vec::len);
        for r in 0..rows {
            let row: Vec<&Value> = data.iter().map(|col| &col[r]).collect();
            insert.execute(rusqlite::params_from_iter(row))?;
        }
    }
    tx.commit()?;
    Ok(())
}
