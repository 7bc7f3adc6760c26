//! Plain-English questions over onboarded relational databases.
//!
//! The pipeline normalizes temporal phrases in a question, asks a pluggable
//! translator for SQL, fills in `'Terminal'` value placeholders from the
//! question text, executes the statement read-only, explains it in plain
//! English and ranks candidate charts for the result.

pub mod executor;
pub mod explain;
pub mod onboarding;
pub mod resolver;
pub mod service;
pub mod sql;
pub mod temporal;
pub mod translator;
pub mod value;
pub mod viz;

pub use executor::{execute, export_csv, import_csv, ExecuteError, ExecutorConfig, ResultColumn, ResultTable};
pub use explain::{explain, Explanation};
pub use onboarding::{
    clean_identifier, onboard_database, ColumnMeta, DataType, DateFormat, OnboardedDatabase,
    OnboardingConfig, OnboardingError, Source,
};
pub use resolver::{resolve, ResolutionResult};
pub use service::{Engine, EngineConfig, HistoryEntry, QueryResponse, ServiceError};
pub use sql::{parse, parse_unresolved, tokenize, ParsedQuery, SqlError, SqlToken, TokenKind};
pub use temporal::{normalize_query, recognize_temporal, NormalizedQuery, TemporalSpan};
pub use translator::{CandidateSql, FixtureTranslator, QueryCache, RemoteTranslator, Translator};
pub use value::Value;
pub use viz::{ChartSpec, ChartType, VisualizationNode};
