//! Read-only execution of resolved SELECT statements, and csv export.

use std::path::Path;

use rusqlite::{Connection, OpenFlags};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::onboarding::{infer_type, DataType, OnboardedDatabase};
use crate::sql::{
    parse, tokenize, AggregateArg, AggregateFn, ColumnRef, ParsedQuery, SelectExpr, SqlError, TokenKind,
};
use crate::value::Value;

#[derive(Debug, Error)]
pub enum ExecuteError {
    #[error("statement rejected: {0}")]
    RejectedStatement(String),
    #[error(transparent)]
    Sql(#[from] SqlError),
    #[error("execution failed: {0}")]
    Execution(#[from] rusqlite::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecutorConfig {
    pub row_cap: usize,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        ExecutorConfig { row_cap: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultColumn {
    pub name: String,
    pub data_type: DataType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<ResultColumn>,
    pub rows: Vec<Vec<Value>>,
    pub row_count: usize,
    /// More rows matched than the cap allowed.
    pub truncated: bool,
}

impl ResultTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Values of one column, top to bottom.
    pub fn column_values(&self, index: usize) -> impl Iterator<Item = &Value> {
        self.rows.iter().map(move |r| &r[index])
    }
}

/// Rejects anything but a single SELECT before it reaches the store.
pub fn check_select_only(sql: &str) -> Result<(), ExecuteError> {
    let tokens = tokenize(sql)?;
    let mut significant = tokens.iter().filter(|t| !t.is_trivia());
    match significant.next() {
        Some(t) if t.kind == TokenKind::Dml && t.text.eq_ignore_ascii_case("select") => {}
        Some(t) => return Err(ExecuteError::RejectedStatement(format!("{} statement", t.text.to_uppercase()))),
        None => return Err(ExecuteError::RejectedStatement("empty statement".into())),
    }
    let mut rest = significant.skip_while(|t| t.text != ";");
    if rest.next().is_some() && rest.next().is_some() {
        return Err(ExecuteError::RejectedStatement("multiple statements".into()));
    }
    Ok(())
}

fn open_read_only(path: &Path) -> Result<Connection, ExecuteError> {
    let conn = Connection::open_with_flags(
        path,
        OpenFlags::SQLITE_OPEN_READ_ONLY | OpenFlags::SQLITE_OPEN_NO_MUTEX,
    )?;
    conn.pragma_update(None, "query_only", true)?;
    Ok(conn)
}

/// Runs a resolved SELECT against the database's store.
///
/// The statement must tokenize as a single SELECT, parse within the
/// supported grammar and be reported read-only by SQLite itself.
pub fn execute(sql: &str, db: &OnboardedDatabase, config: &ExecutorConfig) -> Result<ResultTable, ExecuteError> {
    check_select_only(sql)?;
    let parsed = parse(sql, db)?;
    let conn = open_read_only(&db.store_path)?;
    let mut stmt = conn.prepare(sql)?;
    if !stmt.readonly() {
        return Err(ExecuteError::RejectedStatement("statement writes to the store".into()));
    }
    let names: Vec<String> = stmt.column_names().into_iter().map(str::to_string).collect();
    let width = names.len();
    let mut rows = Vec::new();
    let mut truncated = false;
    let mut cursor = stmt.query([])?;
    while let Some(row) = cursor.next()? {
        if rows.len() == config.row_cap {
            truncated = true;
            break;
        }
        let mut values = Vec::with_capacity(width);
        for i in 0..width {
            values.push(Value::from(row.get_ref(i)?));
        }
        rows.push(values);
    }
    let columns = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let data_type = declared_type(&parsed, db, i, &name).unwrap_or_else(|| {
                let values: Vec<Value> = rows.iter().map(|r| r[i].clone()).collect();
                infer_type(&values)
            });
            ResultColumn { name, data_type }
        })
        .collect();
    Ok(ResultTable { columns, row_count: rows.len(), rows, truncated })
}

fn schema_type(parsed: &ParsedQuery, db: &OnboardedDatabase, col: &ColumnRef) -> Option<DataType> {
    let table = col.table.as_deref().and_then(|q| parsed.core.table_for(q))?;
    db.column(table, &col.column).map(|c| c.data_type)
}

/// The schema type of an output column, when the SELECT list makes it
/// knowable without looking at values.
fn declared_type(parsed: &ParsedQuery, db: &OnboardedDatabase, index: usize, name: &str) -> Option<DataType> {
    let core = &parsed.core;
    let plain = core.items.iter().all(|i| matches!(i.expr, SelectExpr::Column(_) | SelectExpr::Aggregate(_)));
    if plain {
        return match &core.items.get(index)?.expr {
            SelectExpr::Column(c) => schema_type(parsed, db, c),
            SelectExpr::Aggregate(a) => match (a.func, &a.arg) {
                (AggregateFn::Count | AggregateFn::Sum | AggregateFn::Avg, _) => Some(DataType::Numeric),
                (_, AggregateArg::Column(c)) => schema_type(parsed, db, c),
                (_, AggregateArg::Star) => None,
            },
            _ => None,
        };
    }
    // Star selects: match the output name against the tables in scope.
    core.tables().into_iter().find_map(|t| db.column(t, name)).map(|c| c.data_type)
}

fn csv_field(v: &Value) -> String {
    v.to_string()
}

/// Serializes a result as RFC 4180 csv: header first, CRLF line ends,
/// fields quoted only when needed. Nulls become empty fields.
pub fn export_csv(result: &ResultTable) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>| -> Result<(), csv::Error> {
        w.write_record(result.columns.iter().map(|c| c.name.as_str()))?;
        for row in &result.rows {
            w.write_record(row.iter().map(csv_field))?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).expect("writing csv to memory cannot fail");
    w.into_inner().expect("in-memory csv buffer")
}

/// Reads csv produced by [`export_csv`] back into a table, typing cells
/// by the given column types. Empty fields read as null.
pub fn import_csv(bytes: &[u8], types: &[DataType]) -> Result<ResultTable, ExecuteError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = r.headers()?.clone();
    let columns: Vec<ResultColumn> = header
        .iter()
        .zip(types.iter().chain(std::iter::repeat(&DataType::Textual)))
        .map(|(name, t)| ResultColumn { name: name.to_string(), data_type: *t })
        .collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let row = record
            .iter()
            .zip(&columns)
            .map(|(cell, col)| match col.data_type {
                _ if cell.is_empty() => Value::Null,
                DataType::Numeric => Value::infer(cell),
                DataType::Textual | DataType::Datetime => Value::Text(cell.to_string()),
            })
            .collect();
        rows.push(row);
    }
    Ok(ResultTable { columns, row_count: rows.len(), rows, truncated: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onboarding::{onboard_database, OnboardingConfig, Source};

    fn fixture(dir: &Path) -> OnboardedDatabase {
        let csv_path = dir.join("customer.csv");
        std::fs::write(
            &csv_path,
            "customer_id,first_name,email,score\n1,MARY,mary.smith@example.org,2.5\n2,LINDA,linda@example.org,3\n",
        )
        .unwrap();
        onboard_database(&Source::Csv(csv_path), &OnboardingConfig::default(), &dir.join("db")).unwrap()
    }

    #[test]
    fn customer_query_returns_email() {
        let dir = tempfile::tempdir().unwrap();
        let db = fixture(dir.path());
        let t = execute(
            "SELECT customer.email FROM customer WHERE customer.first_name = 'MARY'",
            &db,
            &ExecutorConfig::default(),
        )
        .unwrap();
        assert_eq!(t.rows, vec![vec![Value::Text("mary.smith@example.org".into())]]);
        assert_eq!(t.columns[0], ResultColumn { name: "email".into(), data_type: DataType::Textual });
        assert!(!t.truncated);
    }

    #[test]
    fn writes_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let db = fixture(dir.path());
        for sql in [
            "DROP TABLE customer",
            "DELETE FROM customer",
            "  -- hi\n UPDATE customer SET email = 'x'",
            "SELECT * FROM customer; DROP TABLE customer",
            "",
        ] {
            let err = execute(sql, &db, &ExecutorConfig::default()).unwrap_err();
            assert!(matches!(err, ExecuteError::RejectedStatement(_)), "{sql}: {err}");
        }
        assert!(check_select_only("SELECT 1;").is_ok());
    }

    #[test]
    fn empty_result_keeps_header() {
        let dir = tempfile::tempdir().unwrap();
        let db = fixture(dir.path());
        let t = execute("SELECT * FROM customer WHERE first_name = 'NOBODY'", &db, &ExecutorConfig::default())
            .unwrap();
        assert_eq!(t.row_count, 0);
        let names: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["customer_id", "first_name", "email", "score"]);
        assert_eq!(t.columns[3].data_type, DataType::Numeric);
        assert_eq!(export_csv(&t), b"customer_id,first_name,email,score\r\n");
    }

    #[test]
    fn row_cap_truncates() {
        let dir = tempfile::tempdir().unwrap();
        let db = fixture(dir.path());
        let t = execute("SELECT first_name FROM customer", &db, &ExecutorConfig { row_cap: 1 }).unwrap();
        assert_eq!(t.row_count, 1);
        assert!(t.truncated);
    }

    #[test]
    fn aggregate_columns_are_numeric() {
        let dir = tempfile::tempdir().unwrap();
        let db = fixture(dir.path());
        let t = execute("SELECT first_name, COUNT(*) AS n FROM customer GROUP BY first_name", &db, &ExecutorConfig::default())
            .unwrap();
        assert_eq!(t.columns[1], ResultColumn { name: "n".into(), data_type: DataType::Numeric });
    }

    #[test]
    fn csv_quoting() {
        let t = ResultTable {
            columns: vec![ResultColumn { name: "a".into(), data_type: DataType::Textual }],
            rows: vec![vec![Value::Text("x, y".into())]],
            row_count: 1,
            truncated: false,
        };
        assert_eq!(export_csv(&t), b"a\r\n\"x, y\"\r\n");
    }

    proptest::proptest! {
        #[test]
        fn csv_round_trip(
            rows in proptest::collection::vec(
                (proptest::option::of("[a-z ,\"\n]{1,8}"), proptest::option::of(proptest::num::i64::ANY), proptest::option::of(-1e9f64..1e9)),
                0..20,
            )
        ) {
            let table = ResultTable {
                columns: vec![
                    ResultColumn { name: "name".into(), data_type: DataType::Textual },
                    ResultColumn { name: "count".into(), data_type: DataType::Numeric },
                    ResultColumn { name: "ratio".into(), data_type: DataType::Numeric },
                ],
                row_count: rows.len(),
                rows: rows
                    .into_iter()
                    .map(|(s, i, r)| vec![
                        s.map_or(Value::Null, Value::Text),
                        i.map_or(Value::Null, Value::Integer),
                        r.map_or(Value::Null, Value::Real),
                    ])
                    .collect(),
                truncated: false,
            };
            let types: Vec<DataType> = table.columns.iter().map(|c| c.data_type).collect();
            let back = import_csv(&export_csv(&table), &types).unwrap();
            proptest::prop_assert_eq!(back, table);
        }
    }
}
