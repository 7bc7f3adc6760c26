//! Replacing `'Terminal'` placeholders with values taken from the question.
//!
//! Each placeholder is dispatched on the data type of the column it filters:
//! textual columns are matched against the column's distinct values after
//! spell correction, numeric columns take the question's numbers in order,
//! and datetime columns take the normalized dates in order.

mod numbers;
mod spell;
mod textual;

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

pub use numbers::{extract_numerals, words_to_digits};
pub use spell::{bounded_edit_distance, correct, max_distance, Correction, Lexicon};
pub use textual::{
    clean_text, correct_tokens, resolve_textual, resolve_textual_detailed, CorrectedToken,
    TextualOutcome, ValueIndex,
};

use crate::onboarding::{DataType, DatePart, OnboardedDatabase, MONTH_NAMES_LONG, MONTH_NAMES_SHORT};
use crate::sql::{find_terminals, parse, terminal_literal_ranges, CompareOp, Literal, SqlError};
use crate::temporal::{CalendarValue, NormalizedQuery, Substitution};
use crate::translator::CandidateSql;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionMethod {
    Exact,
    SpellCorrected,
    Bigram,
    NumericOrder,
    Datetime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Replacement {
    pub column: String,
    pub value: String,
    pub method: ResolutionMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolutionResult {
    pub sql: String,
    pub replacements: Vec<Replacement>,
    /// One entry per placeholder left unresolved.
    pub warnings: Vec<String>,
}

impl ResolutionResult {
    pub fn is_complete(&self) -> bool {
        self.warnings.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error(transparent)]
    Sql(#[from] SqlError),
    #[error("could not read values of {table}.{column}: {message}")]
    Values { table: String, column: String, message: String },
    #[error("placeholder bookkeeping mismatch: {found} literals for {expected} conditions")]
    Mismatch { expected: usize, found: usize },
}

/// Supplies the distinct-value index of a column.
pub trait ValueIndexProvider {
    fn index(&self, table: &str, column: &str) -> Result<Arc<ValueIndex>, ResolveError>;
}

/// Fixed column values, for tests and small in-memory datasets.
#[derive(Debug, Default, Clone)]
pub struct InMemoryValues {
    columns: HashMap<(String, String), Arc<ValueIndex>>,
}

impl InMemoryValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_column(mut self, table: &str, column: &str, values: &[&str]) -> Self {
        let idx = ValueIndex::build(table, column, values.iter().map(|v| v.to_string()));
        self.columns
            .insert((table.to_ascii_lowercase(), column.to_ascii_lowercase()), Arc::new(idx));
        self
    }
}

impl ValueIndexProvider for InMemoryValues {
    fn index(&self, table: &str, column: &str) -> Result<Arc<ValueIndex>, ResolveError> {
        Ok(self
            .columns
            .get(&(table.to_ascii_lowercase(), column.to_ascii_lowercase()))
            .cloned()
            .unwrap_or_else(|| Arc::new(ValueIndex::build(table, column, Vec::new()))))
    }
}

type IndexSlot = Arc<Mutex<Option<Arc<ValueIndex>>>>;

/// Lazily built value indexes, one build per column at a time, evicted
/// oldest-first once the cached values exceed `max_values`.
pub struct ValueIndexCache {
    max_values: usize,
    inner: Mutex<IndexCacheState>,
}

#[derive(Default)]
struct IndexCacheState {
    slots: HashMap<(String, String, String), IndexSlot>,
    order: Vec<(String, String, String)>,
    held: usize,
}

impl ValueIndexCache {
    pub const DEFAULT_MAX_VALUES: usize = 1_000_000;

    pub fn new(max_values: usize) -> Self {
        ValueIndexCache { max_values, inner: Mutex::default() }
    }

    pub fn get_or_build(
        &self,
        database_id: &str,
        table: &str,
        column: &str,
        build: impl FnOnce() -> Result<Vec<String>, ResolveError>,
    ) -> Result<Arc<ValueIndex>, ResolveError> {
        let key = (database_id.to_string(), table.to_ascii_lowercase(), column.to_ascii_lowercase());
        let slot = {
            let mut state = self.inner.lock().expect("index cache poisoned");
            state.slots.entry(key.clone()).or_default().clone()
        };
        let mut guard = slot.lock().expect("index slot poisoned");
        if let Some(idx) = guard.as_ref() {
            return Ok(idx.clone());
        }
        let idx = Arc::new(ValueIndex::build(table, column, build()?));
        *guard = Some(idx.clone());
        drop(guard);

        let mut state = self.inner.lock().expect("index cache poisoned");
        state.order.push(key);
        state.held += idx.len();
        while state.held > self.max_values && state.order.len() > 1 {
            let oldest = state.order.remove(0);
            if let Some(slot) = state.slots.remove(&oldest) {
                if let Some(old) = slot.lock().expect("index slot poisoned").take() {
                    state.held -= old.len();
                }
            }
        }
        Ok(idx)
    }

    /// Drops every index of one database.
    pub fn invalidate(&self, database_id: &str) {
        let mut state = self.inner.lock().expect("index cache poisoned");
        let mut freed = 0;
        state.slots.retain(|k, slot| {
            if k.0 == database_id {
                freed += slot.lock().map(|s| s.as_ref().map_or(0, |i| i.len())).unwrap_or(0);
                false
            } else {
                true
            }
        });
        state.order.retain(|k| k.0 != database_id);
        state.held -= freed;
    }
}

/// Assigns the query's numbers, in order, to `count` numeric placeholders.
/// Number words are converted to digits first; surplus numbers are ignored
/// and surplus placeholders stay `None`.
pub fn resolve_numeric(query: &str, count: usize) -> Vec<Option<String>> {
    resolve_numeric_masked(query, &[], count)
}

fn resolve_numeric_masked(query: &str, masked: &[Range<usize>], count: usize) -> Vec<Option<String>> {
    // Blank out masked regions so their digits are not taken as values.
    let mut text = query.to_string();
    for r in masked {
        text.replace_range(r.clone(), &" ".repeat(r.len()));
    }
    let numerals: Vec<String> = extract_numerals(&words_to_digits(&text)).into_iter().map(|n| n.0).collect();
    (0..count).map(|i| numerals.get(i).cloned()).collect()
}

/// The `yyyymmdd` form for a datetime placeholder. Day-level dates fit any
/// comparison; a month or year fits only a range comparison, where it is
/// widened to its first or last day.
pub fn datetime_value(value: &CalendarValue, op: CompareOp) -> Option<String> {
    if let Some(s) = value.yyyymmdd() {
        return Some(s);
    }
    let first_month = value.month.unwrap_or(1);
    let last_month = value.month.unwrap_or(12);
    let start = chrono::NaiveDate::from_ymd_opt(value.year, first_month, 1)?;
    let end = chrono::NaiveDate::from_ymd_opt(value.year, last_month, 1)?
        .checked_add_months(chrono::Months::new(1))?
        .pred_opt()?;
    let day = match op {
        CompareOp::GtEq | CompareOp::Lt => start,
        CompareOp::Gt | CompareOp::LtEq => end,
        _ => return None,
    };
    Some(day.format("%Y%m%d").to_string())
}

/// Assigns temporal substitutions, in textual order, to datetime
/// placeholders.
pub fn resolve_datetime(substitutions: &[Substitution], ops: &[CompareOp]) -> Vec<Option<String>> {
    ops.iter()
        .enumerate()
        .map(|(i, op)| substitutions.get(i).and_then(|s| datetime_value(&s.span.resolved, *op)))
        .collect()
}

fn date_part_value(value: &CalendarValue, part: DatePart) -> Option<Literal> {
    let month = value.month.map(|m| m as usize - 1);
    Some(match part {
        DatePart::Year => Literal::Number(value.year.to_string()),
        DatePart::Month => Literal::Number((month? + 1).to_string()),
        DatePart::Day => Literal::Number(value.day?.to_string()),
        DatePart::MonthNameShort => Literal::String(MONTH_NAMES_SHORT[month?].to_string()),
        DatePart::MonthNameLong => Literal::String(MONTH_NAMES_LONG[month?].to_string()),
    })
}

fn warning(column: &str, reason: &str) -> String {
    format!("Could not resolve 'Terminal' for {column}: {reason}. Please check the query again.")
}

enum Slot {
    Textual,
    Numeric,
    Datetime(CompareOp),
    DatePart { source: String, part: DatePart },
}

/// Fills every `'Terminal'` literal in the candidate SQL.
///
/// Only the placeholder literals change; unresolved ones stay in place and
/// each produces exactly one warning.
pub fn resolve(
    query: &NormalizedQuery,
    candidate: &CandidateSql,
    schema: &OnboardedDatabase,
    values: &dyn ValueIndexProvider,
    lexicon: &Lexicon,
) -> Result<ResolutionResult, ResolveError> {
    let parsed = parse(&candidate.sql, schema)?;
    let terminals = find_terminals(&parsed);
    let ranges = terminal_literal_ranges(&candidate.sql)?;
    if ranges.len() != terminals.len() {
        return Err(ResolveError::Mismatch { expected: terminals.len(), found: ranges.len() });
    }
    let conditions: Vec<_> = parsed.conditions().map(|(_, c)| c.clone()).collect();

    let mut slots = Vec::with_capacity(terminals.len());
    for t in &terminals {
        let table = t.table.clone().unwrap_or_default();
        let meta = schema
            .column(&table, &t.column.column)
            .ok_or_else(|| SqlError::UnknownIdentifier(t.column.to_string()))?;
        let op = conditions[t.condition_index].op;
        let derived_source = schema.derived_columns.iter().find_map(|(source, derived)| {
            let (src_table, src_col) = source.split_once('.')?;
            (src_table.eq_ignore_ascii_case(&table)
                && derived.iter().any(|d| d.eq_ignore_ascii_case(&meta.cleaned_name)))
            .then(|| format!("{src_table}.{src_col}"))
        });
        slots.push(match (meta.derived, derived_source) {
            (Some(part), Some(source)) => Slot::DatePart { source, part },
            _ => match meta.data_type {
                DataType::Textual => Slot::Textual,
                DataType::Numeric => Slot::Numeric,
                DataType::Datetime => Slot::Datetime(op),
            },
        });
    }

    let mut filled: Vec<Option<(String, ResolutionMethod)>> = vec![None; slots.len()];
    let mut reasons: Vec<String> = vec![String::new(); slots.len()];

    // Date parts: consecutive placeholders on one source column share a
    // span until a part repeats.
    let mut cursors: HashMap<String, (usize, Vec<DatePart>)> = HashMap::new();
    let mut fallback = Vec::new();
    for (i, slot) in slots.iter().enumerate() {
        if let Slot::DatePart { source, part, .. } = slot {
            let (cursor, used) = cursors.entry(source.clone()).or_insert((0, Vec::new()));
            if used.contains(part) {
                *cursor += 1;
                used.clear();
            }
            used.push(*part);
            match query.substitutions.get(*cursor).and_then(|s| date_part_value(&s.span.resolved, *part)) {
                Some(lit) => filled[i] = Some((lit.to_string(), ResolutionMethod::Datetime)),
                None => fallback.push(i),
            }
        }
    }

    let masked = query.replacement_ranges();
    let numeric: Vec<usize> = slots
        .iter()
        .enumerate()
        .filter(|(i, s)| {
            matches!(s, Slot::Numeric)
                || (fallback.contains(i)
                    && matches!(s, Slot::DatePart { part: DatePart::Day | DatePart::Month | DatePart::Year, .. }))
        })
        .map(|(i, _)| i)
        .collect();
    for (slot, value) in numeric.iter().zip(resolve_numeric_masked(&query.normalized, &masked, numeric.len())) {
        match value {
            Some(v) => filled[*slot] = Some((v, ResolutionMethod::NumericOrder)),
            None => reasons[*slot] = "no number left in the question".into(),
        }
    }

    let datetime: Vec<(usize, CompareOp)> = slots
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            Slot::Datetime(op) => Some((i, *op)),
            _ => None,
        })
        .collect();
    let ops: Vec<CompareOp> = datetime.iter().map(|d| d.1).collect();
    for ((slot, _), value) in datetime.iter().zip(resolve_datetime(&query.substitutions, &ops)) {
        match value {
            Some(v) => filled[*slot] = Some((Literal::String(v).to_string(), ResolutionMethod::Datetime)),
            None => reasons[*slot] = "no matching date in the question".into(),
        }
    }

    for (i, slot) in slots.iter().enumerate() {
        let textual = matches!(slot, Slot::Textual)
            || (fallback.contains(&i)
                && matches!(slot, Slot::DatePart { part: DatePart::MonthNameShort | DatePart::MonthNameLong, .. }));
        if !textual {
            continue;
        }
        let t = &terminals[i];
        let table = t.table.clone().unwrap_or_default();
        let index = values.index(&table, &t.column.column)?;
        match resolve_textual_detailed(&query.normalized, &index, lexicon) {
            TextualOutcome::Resolved { value, method } => {
                filled[i] = Some((Literal::String(value).to_string(), method))
            }
            TextualOutcome::NoMatch => reasons[i] = "no column value found in the question".into(),
            TextualOutcome::Ambiguous(candidates) => {
                reasons[i] = format!("the question matches several values ({})", candidates.join(", "))
            }
        }
    }

    let mut sql = String::with_capacity(candidate.sql.len());
    let mut cursor = 0;
    let mut replacements = Vec::new();
    let mut warnings = Vec::new();
    for (i, range) in ranges.iter().enumerate() {
        sql.push_str(&candidate.sql[cursor..range.start]);
        let column = terminals[i].column.to_string();
        match &filled[i] {
            Some((text, method)) => {
                sql.push_str(text);
                let value = match text.strip_prefix('\'').and_then(|s| s.strip_suffix('\'')) {
                    Some(inner) => inner.replace("''", "'"),
                    None => text.clone(),
                };
                replacements.push(Replacement { column, value, method: *method });
            }
            None => {
                sql.push_str(&candidate.sql[range.clone()]);
                let reason = if reasons[i].is_empty() { "no value found" } else { &reasons[i] };
                warnings.push(warning(&column, reason));
            }
        }
        cursor = range.end;
    }
    sql.push_str(&candidate.sql[cursor..]);
    Ok(ResolutionResult { sql, replacements, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_assignment_follows_text_order() {
        assert_eq!(resolve_numeric("clicked on the ad at least two times", 1), [Some("2".to_string())]);
        assert_eq!(
            resolve_numeric("orders between 10 and 20", 2),
            [Some("10".to_string()), Some("20".to_string())]
        );
        assert_eq!(resolve_numeric("Which places had a positive longitude value?", 1), [None]);
        assert_eq!(resolve_numeric("top 3 of 5", 1), [Some("3".to_string())]);
    }

    #[test]
    fn datetime_assignment() {
        use crate::temporal::normalize_query;
        let at = chrono::NaiveDate::from_ymd_opt(2022, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let nq = normalize_query("sales on 4th July 2021", at);
        assert_eq!(resolve_datetime(&nq.substitutions, &[CompareOp::Eq]), [Some("20210704".to_string())]);
        assert_eq!(resolve_datetime(&[], &[CompareOp::Eq]), [None]);
        let nq = normalize_query("between 2021-01-05 and 2021-02-10", at);
        assert_eq!(
            resolve_datetime(&nq.substitutions, &[CompareOp::GtEq, CompareOp::LtEq]),
            [Some("20210105".to_string()), Some("20210210".to_string())]
        );
        let nq = normalize_query("after June, 2021", at);
        assert_eq!(resolve_datetime(&nq.substitutions, &[CompareOp::Gt]), [Some("20210630".to_string())]);
        assert_eq!(resolve_datetime(&nq.substitutions, &[CompareOp::Eq]), [None]);
    }

    #[test]
    fn index_cache_builds_once_and_evicts() {
        let cache = ValueIndexCache::new(3);
        let mut builds = 0;
        for _ in 0..2 {
            cache
                .get_or_build("db", "t", "a", || {
                    builds += 1;
                    Ok(vec!["x".into(), "y".into()])
                })
                .unwrap();
        }
        assert_eq!(builds, 1);
        cache.get_or_build("db", "t", "b", || Ok(vec!["z".into(), "w".into()])).unwrap();
        cache
            .get_or_build("db", "t", "a", || {
                builds += 1;
                Ok(vec!["x".into()])
            })
            .unwrap();
        assert_eq!(builds, 2);
    }
}
