//! One-time database registration.
//!
//! Onboarding cleans every identifier, appends configured synonyms to column
//! names, splits datetime columns into day/month/year/month-name columns and
//! writes a queryable SQLite copy next to a `schema.json` sidecar.

mod datetime;
mod identifier;
mod store;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use datetime::{
    expand_datetime_column, DateFormat, DateParts, DerivedColumn, ExpandedDatetime,
    MONTH_NAMES_LONG, MONTH_NAMES_SHORT,
};
pub use identifier::clean_identifier;
pub use store::{load_source, RawTable, Source};
pub(crate) use store::{infer_type, quote};

pub const SCHEMA_FILE: &str = "schema.json";
pub const STORE_FILE: &str = "store.sqlite";

#[derive(Debug, Error)]
pub enum OnboardingError {
    #[error("identifier {0:?} has no alphanumeric content")]
    EmptyIdentifier(String),
    #[error("synonym {synonym:?} for column {column:?} collides with column {peer:?}")]
    Ambiguity {
        column: String,
        synonym: String,
        peer: String,
    },
    #[error("row {row} of column {column:?}: {value:?} does not match {format:?}")]
    FormatMismatch {
        column: String,
        row: usize,
        value: String,
        format: String,
    },
    #[error("invalid date format {pattern:?}: {reason}")]
    InvalidDateFormat { pattern: String, reason: String },
    #[error("config references unknown column {0:?}")]
    UnknownColumn(String),
    #[error("duplicate identifier {name:?} in table {table:?}")]
    DuplicateIdentifier { table: String, name: String },
    #[error("unreadable source: {0}")]
    Source(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sqlite(#[from] rusqlite::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataType {
    Textual,
    Numeric,
    Datetime,
}

/// Which part of a source datetime column a derived column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatePart {
    Day,
    Month,
    Year,
    MonthNameShort,
    MonthNameLong,
}

impl DatePart {
    pub fn suffix(self) -> &'static str {
        match self {
            DatePart::Day => "day",
            DatePart::Month => "month",
            DatePart::Year => "year",
            DatePart::MonthNameShort => "month_name_short",
            DatePart::MonthNameLong => "month_name_long",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub original_name: String,
    pub cleaned_name: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    pub data_type: DataType,
    /// Layout of the source values. The stored copy holds `yyyymmdd` text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datetime_format: Option<DateFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<DatePart>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSchema {
    pub name: String,
    pub columns: Vec<ColumnMeta>,
    pub row_count: usize,
}

impl TableSchema {
    pub fn column(&self, name: &str) -> Option<&ColumnMeta> {
        self.columns
            .iter()
            .find(|c| c.cleaned_name.eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRenames {
    pub original_table: String,
    pub columns: BTreeMap<String, String>,
}

/// Human-supplied onboarding choices.
///
/// Keys in every map name a source column either bare (`invoice date`) or
/// table-qualified (`invoices.invoice date`); both original and cleaned
/// spellings are accepted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OnboardingConfig {
    /// Table name for single-table csv sources; defaults to the file stem.
    #[serde(default)]
    pub table_name: Option<String>,
    /// Manual plain-English renames applied before cleaning.
    #[serde(default)]
    pub renames: BTreeMap<String, String>,
    #[serde(default)]
    pub synonym_map: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub datetime_columns: BTreeMap<String, DateFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnboardedDatabase {
    pub id: String,
    pub tables: Vec<TableSchema>,
    /// Final table name -> original table name and original -> final column names.
    pub rename_ledger: BTreeMap<String, TableRenames>,
    /// `table.column` of each datetime column -> its derived column names.
    pub derived_columns: BTreeMap<String, Vec<String>>,
    pub created_at: DateTime<Utc>,
    #[serde(skip)]
    pub store_path: PathBuf,
}

impl OnboardedDatabase {
    pub fn table(&self, name: &str) -> Option<&TableSchema> {
        self.tables.iter().find(|t| t.name.eq_ignore_ascii_case(name))
    }

    pub fn column(&self, table: &str, column: &str) -> Option<&ColumnMeta> {
        self.table(table)?.column(column)
    }

    /// Reads `schema.json` from an onboarded directory.
    pub fn load(dir: &Path) -> Result<Self, OnboardingError> {
        let text = std::fs::read_to_string(dir.join(SCHEMA_FILE))?;
        let mut db: OnboardedDatabase = serde_json::from_str(&text)?;
        db.store_path = dir.join(STORE_FILE);
        Ok(db)
    }

    /// The schema without the per-run id and timestamp, as pretty JSON.
    pub fn schema_json(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            tables: &'a [TableSchema],
            rename_ledger: &'a BTreeMap<String, TableRenames>,
            derived_columns: &'a BTreeMap<String, Vec<String>>,
        }
        serde_json::to_string_pretty(&View {
            tables: &self.tables,
            rename_ledger: &self.rename_ledger,
            derived_columns: &self.derived_columns,
        })
        .expect("schema serializes")
    }
}

/// Appends cleaned synonyms to a column name (`heading` + `[title, headline]`
/// -> `heading_title_headline`).
///
/// Fails when a synonym token equals any token of a peer column's final name.
pub fn apply_synonyms(
    column: &ColumnMeta,
    synonyms: &[String],
    peer_columns: &[ColumnMeta],
) -> Result<ColumnMeta, OnboardingError> {
    let mut out = column.clone();
    if synonyms.is_empty() {
        return Ok(out);
    }
    for synonym in synonyms {
        for token in identifier::tokens(synonym) {
            for peer in peer_columns {
                if identifier::tokens(&peer.cleaned_name).any(|t| t == token) {
                    return Err(OnboardingError::Ambiguity {
                        column: column.cleaned_name.clone(),
                        synonym: synonym.clone(),
                        peer: peer.cleaned_name.clone(),
                    });
                }
            }
        }
    }
    let mut name = column.cleaned_name.clone();
    for synonym in synonyms {
        name.push('_');
        name.push_str(synonym);
    }
    out.cleaned_name = name;
    out.synonyms = synonyms.to_vec();
    Ok(out)
}

struct ConfigLookup<'a> {
    config: &'a OnboardingConfig,
    used: HashSet<String>,
}

impl<'a> ConfigLookup<'a> {
    fn new(config: &'a OnboardingConfig) -> Self {
        ConfigLookup { config, used: HashSet::new() }
    }

    fn find<'m, V>(&mut self, map: &'m BTreeMap<String, V>, table: &str, column: &str) -> Option<&'m V> {
        let clean_col = clean_identifier(column).ok();
        let clean_table = clean_identifier(table).ok();
        for (key, value) in map {
            let c = match key.split_once('.') {
                Some((t, c)) if map_key_is_qualified(t, table, clean_table.as_deref()) => c,
                _ => key.as_str(),
            };
            let hit = c == column || clean_identifier(c).ok() == clean_col;
            if hit {
                self.used.insert(key.clone());
                return Some(value);
            }
        }
        None
    }

    fn unused(&self) -> Option<String> {
        let c = self.config;
        c.renames
            .keys()
            .chain(c.synonym_map.keys())
            .chain(c.datetime_columns.keys())
            .find(|k| !self.used.contains(*k))
            .cloned()
    }
}

fn map_key_is_qualified(prefix: &str, table: &str, clean_table: Option<&str>) -> bool {
    prefix == table || clean_identifier(prefix).ok().as_deref() == clean_table
}

/// Registers a source database: cleans identifiers, applies synonyms,
/// expands datetime columns and writes `store.sqlite` plus `schema.json`
/// into `dest_dir`.
pub fn onboard_database(
    source: &Source,
    config: &OnboardingConfig,
    dest_dir: &Path,
) -> Result<OnboardedDatabase, OnboardingError> {
    let raw_tables = load_source(source, config)?;
    let mut lookup = ConfigLookup::new(config);

    // First pass: base names for every column across the database.
    struct Pending {
        meta: ColumnMeta,
        synonyms: Vec<String>,
        values: Vec<crate::value::Value>,
    }
    let mut staged: Vec<(String, String, Vec<Pending>, usize)> = Vec::new();
    let mut seen_tables = HashSet::new();
    for raw in raw_tables {
        let table_name = clean_identifier(&raw.name)?;
        if !seen_tables.insert(table_name.clone()) {
            return Err(OnboardingError::DuplicateIdentifier {
                table: table_name.clone(),
                name: table_name,
            });
        }
        let row_count = raw.rows.len();
        let mut columns = Vec::new();
        for (idx, original) in raw.columns.iter().enumerate() {
            let english = lookup
                .find(&config.renames, &raw.name, original)
                .cloned()
                .unwrap_or_else(|| original.clone());
            let cleaned = clean_identifier(&english)?;
            let synonyms = lookup
                .find(&config.synonym_map, &raw.name, original)
                .map(|s| s.iter().map(|x| clean_identifier(x)).collect::<Result<Vec<_>, _>>())
                .transpose()?
                .unwrap_or_default();
            let format = lookup.find(&config.datetime_columns, &raw.name, original).cloned();
            let values: Vec<_> = raw.rows.iter().map(|r| r[idx].clone()).collect();
            let data_type = match format {
                Some(_) => DataType::Datetime,
                None => store::infer_type(&values),
            };
            columns.push(Pending {
                meta: ColumnMeta {
                    original_name: original.clone(),
                    cleaned_name: cleaned,
                    synonyms: Vec::new(),
                    data_type,
                    datetime_format: format,
                    derived: None,
                },
                synonyms,
                values,
            });
        }
        staged.push((table_name, raw.name, columns, row_count));
    }
    if let Some(key) = lookup.unused() {
        return Err(OnboardingError::UnknownColumn(key));
    }

    // Peers see each other's final names; columns sharing a base name (the
    // same concept in two tables) are not peers of each other.
    let finals: Vec<(String, ColumnMeta)> = staged
        .iter()
        .flat_map(|(_, _, cols, _)| cols)
        .map(|p| {
            let mut m = p.meta.clone();
            for s in &p.synonyms {
                m.cleaned_name.push('_');
                m.cleaned_name.push_str(s);
            }
            (p.meta.cleaned_name.clone(), m)
        })
        .collect();

    let mut tables = Vec::new();
    let mut rename_ledger = BTreeMap::new();
    let mut derived_columns = BTreeMap::new();
    let mut store_tables = Vec::new();
    for (table_name, original_table, pending, row_count) in staged {
        let mut metas = Vec::new();
        let mut data: Vec<Vec<crate::value::Value>> = Vec::new();
        let mut renames = BTreeMap::new();
        let mut derived = Vec::new();
        for p in pending {
            let peers: Vec<ColumnMeta> = finals
                .iter()
                .filter(|(base, _)| *base != p.meta.cleaned_name)
                .map(|(_, m)| m.clone())
                .collect();
            let meta = apply_synonyms(&p.meta, &p.synonyms, &peers)?;
            renames.insert(meta.original_name.clone(), meta.cleaned_name.clone());
            let mut values = p.values;
            if let Some(format) = meta.datetime_format.clone() {
                let expanded = expand_datetime_column(&meta, &format, &values)?;
                values = expanded
                    .dates
                    .iter()
                    .map(|d| match d {
                        Some(d) => crate::value::Value::Text(d.format("%Y%m%d").to_string()),
                        None => crate::value::Value::Null,
                    })
                    .collect();
                derived_columns.insert(
                    format!("{table_name}.{}", meta.cleaned_name),
                    expanded.columns.iter().map(|c| c.meta.cleaned_name.clone()).collect(),
                );
                derived.extend(expanded.columns);
            } else if meta.data_type == DataType::Textual {
                values = values.into_iter().map(store::as_text).collect();
            }
            metas.push(meta);
            data.push(values);
        }
        for d in derived {
            metas.push(d.meta);
            data.push(d.values);
        }
        let mut names = HashSet::new();
        for m in &metas {
            if !names.insert(m.cleaned_name.clone()) {
                return Err(OnboardingError::DuplicateIdentifier {
                    table: table_name.clone(),
                    name: m.cleaned_name.clone(),
                });
            }
        }
        rename_ledger.insert(
            table_name.clone(),
            TableRenames { original_table, columns: renames },
        );
        store_tables.push((table_name.clone(), metas.clone(), data));
        tables.push(TableSchema { name: table_name, columns: metas, row_count });
    }

    std::fs::create_dir_all(dest_dir)?;
    let store_path = dest_dir.join(STORE_FILE);
    store::write_store(&store_path, &store_tables)?;
    let db = OnboardedDatabase {
        id: uuid::Uuid::new_v4().simple().to_string(),
        tables,
        rename_ledger,
        derived_columns,
        created_at: Utc::now(),
        store_path,
    };
    std::fs::write(dest_dir.join(SCHEMA_FILE), serde_json::to_string_pretty(&db)?)?;
    Ok(db)
}
