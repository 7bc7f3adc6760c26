//! Temporal phrase recognition and rewriting.
//!
//! Dates in a question are rewritten into the forms the translator handles
//! best: a specific day becomes `yyyymmdd`, a month becomes
//! `Month: <Name>, Year: <yyyy>` and a bare year becomes `Year: <yyyy>`.
//! Relative phrases (`last month`, `yesterday`) are resolved against an
//! injected reference time.

use std::sync::OnceLock;

use chrono::{Datelike, Duration, Months, NaiveDate, NaiveDateTime};
use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};

use crate::onboarding::MONTH_NAMES_LONG;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalKind {
    ExactDate,
    MonthYear,
    YearOnly,
    Relative,
}

/// A calendar value at year, month or day granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarValue {
    pub year: i32,
    pub month: Option<u32>,
    pub day: Option<u32>,
}

impl CalendarValue {
    fn day(d: NaiveDate) -> Self {
        CalendarValue { year: d.year(), month: Some(d.month()), day: Some(d.day()) }
    }

    fn month(d: NaiveDate) -> Self {
        CalendarValue { year: d.year(), month: Some(d.month()), day: None }
    }

    fn year(year: i32) -> Self {
        CalendarValue { year, month: None, day: None }
    }

    /// `yyyymmdd` when the value has day granularity.
    pub fn yyyymmdd(&self) -> Option<String> {
        Some(format!("{:04}{:02}{:02}", self.year, self.month?, self.day?))
    }

    /// The replacement text used in normalized queries.
    pub fn standard_form(&self) -> String {
        match (self.month, self.day) {
            (Some(m), Some(d)) => format!("{:04}{:02}{:02}", self.year, m, d),
            (Some(m), None) => {
                format!("Month: {}, Year: {}", MONTH_NAMES_LONG[m as usize - 1], self.year)
            }
            _ => format!("Year: {}", self.year),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalSpan {
    /// Byte offsets into the original query.
    pub start: usize,
    pub end: usize,
    pub kind: TemporalKind,
    pub resolved: CalendarValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub span: TemporalSpan,
    pub replacement: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedQuery {
    pub original: String,
    pub normalized: String,
    pub substitutions: Vec<Substitution>,
}

impl NormalizedQuery {
    /// A query with no temporal content.
    pub fn plain(text: &str) -> Self {
        NormalizedQuery {
            original: text.to_string(),
            normalized: text.to_string(),
            substitutions: Vec::new(),
        }
    }

    /// Byte ranges of the replacements within `normalized`.
    pub fn replacement_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut shift: isize = 0;
        self.substitutions
            .iter()
            .map(|s| {
                let start = (s.span.start as isize + shift) as usize;
                shift += s.replacement.len() as isize - (s.span.end - s.span.start) as isize;
                start..start + s.replacement.len()
            })
            .collect()
    }

    /// Rebuilds `normalized` from `original` and the substitutions.
    pub fn apply(&self) -> String {
        let mut out = String::with_capacity(self.original.len());
        let mut cursor = 0;
        for s in &self.substitutions {
            out.push_str(&self.original[cursor..s.span.start]);
            out.push_str(&s.replacement);
            cursor = s.span.end;
        }
        out.push_str(&self.original[cursor..]);
        out
    }
}

const MONTH_ALT: &str = "january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec";
const CUE_WORDS: &str = "in|during|since|before|after|until|till|from|to|through|for|of";

struct Rules {
    iso: Regex,
    dmy: Regex,
    day_month: Regex,
    month_day: Regex,
    month_year: Regex,
    year_word: Regex,
    cue_year: Regex,
    relative_word: Regex,
    relative_unit: Regex,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let re = |s: String| Regex::new(&s).expect("temporal pattern compiles");
        Rules {
            iso: re(r"\b(\d{4})-(\d{1,2})-(\d{1,2})\b".into()),
            dmy: re(r"\b(\d{1,2})/(\d{1,2})/(\d{4})\b".into()),
            day_month: re(format!(
                r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th)?(?:\s+of)?\s+({MONTH_ALT})\b(?:,?\s+(\d{{4}})\b)?"
            )),
            month_day: re(format!(
                r"(?i)\b({MONTH_ALT})\s+(\d{{1,2}})(?:st|nd|rd|th)?\b(?:,?\s+(\d{{4}})\b)?"
            )),
            month_year: re(format!(r"(?i)\b({MONTH_ALT})\.?(?:,|\s+of)?\s+(\d{{4}})\b")),
            year_word: re(r"(?i)\byear\s+(\d{4})\b".into()),
            cue_year: re(format!(r"(?i)\b(?:{CUE_WORDS})\s+((?:19|20)\d{{2}})\b")),
            relative_word: re(r"(?i)\b(yesterday|today|tomorrow)\b".into()),
            relative_unit: re(
                r"(?i)\b(last|this|next|previous|current)\s+(day|week|month|year)\b".into(),
            ),
        }
    })
}

fn month_number(name: &str) -> Option<u32> {
    let lower = name.to_ascii_lowercase();
    let idx = MONTH_NAMES_LONG
        .iter()
        .position(|m| m.to_ascii_lowercase().starts_with(&lower[..lower.len().min(3)]))?;
    Some(idx as u32 + 1)
}

fn num(c: &Captures<'_>, i: usize) -> Option<u32> {
    c.get(i)?.as_str().parse().ok()
}

/// Finds every temporal phrase in `query`.
///
/// Overlapping matches are settled by earliest start, then longest match.
pub fn recognize_temporal(query: &str, reference_time: NaiveDateTime) -> Vec<TemporalSpan> {
    let today = reference_time.date();
    let r = rules();
    let mut found: Vec<TemporalSpan> = Vec::new();
    let mut push = |start: usize, end: usize, kind, resolved: Option<CalendarValue>| {
        if let Some(resolved) = resolved {
            found.push(TemporalSpan { start, end, kind, resolved });
        }
    };

    for c in r.iso.captures_iter(query) {
        let m = c.get(0).unwrap();
        let date = NaiveDate::from_ymd_opt(num(&c, 1).unwrap() as i32, num(&c, 2).unwrap(), num(&c, 3).unwrap());
        push(m.start(), m.end(), TemporalKind::ExactDate, date.map(CalendarValue::day));
    }
    for c in r.dmy.captures_iter(query) {
        let m = c.get(0).unwrap();
        let date = NaiveDate::from_ymd_opt(num(&c, 3).unwrap() as i32, num(&c, 2).unwrap(), num(&c, 1).unwrap());
        push(m.start(), m.end(), TemporalKind::ExactDate, date.map(CalendarValue::day));
    }
    for (re, day_idx, month_idx) in [(&r.day_month, 1, 2), (&r.month_day, 2, 1)] {
        for c in re.captures_iter(query) {
            let m = c.get(0).unwrap();
            let year = num(&c, 3).map_or(today.year(), |y| y as i32);
            let date = month_number(&c[month_idx])
                .and_then(|month| NaiveDate::from_ymd_opt(year, month, num(&c, day_idx)?));
            push(m.start(), m.end(), TemporalKind::ExactDate, date.map(CalendarValue::day));
        }
    }
    for c in r.month_year.captures_iter(query) {
        let m = c.get(0).unwrap();
        let date = month_number(&c[1]).and_then(|month| NaiveDate::from_ymd_opt(num(&c, 2)? as i32, month, 1));
        push(m.start(), m.end(), TemporalKind::MonthYear, date.map(CalendarValue::month));
    }
    for c in r.year_word.captures_iter(query) {
        let m = c.get(0).unwrap();
        push(m.start(), m.end(), TemporalKind::YearOnly, num(&c, 1).map(|y| CalendarValue::year(y as i32)));
    }
    for c in r.cue_year.captures_iter(query) {
        let m = c.get(1).unwrap();
        push(m.start(), m.end(), TemporalKind::YearOnly, num(&c, 1).map(|y| CalendarValue::year(y as i32)));
    }
    for c in r.relative_word.captures_iter(query) {
        let m = c.get(0).unwrap();
        let date = match c[1].to_ascii_lowercase().as_str() {
            "yesterday" => today.pred_opt(),
            "tomorrow" => today.succ_opt(),
            _ => Some(today),
        };
        push(m.start(), m.end(), TemporalKind::Relative, date.map(CalendarValue::day));
    }
    for c in r.relative_unit.captures_iter(query) {
        let m = c.get(0).unwrap();
        let offset: i32 = match c[1].to_ascii_lowercase().as_str() {
            "last" | "previous" => -1,
            "next" => 1,
            _ => 0,
        };
        let resolved = match c[2].to_ascii_lowercase().as_str() {
            "day" => today
                .checked_add_signed(Duration::days(offset.into()))
                .map(CalendarValue::day),
            "week" => {
                let monday = today - Duration::days(today.weekday().num_days_from_monday().into());
                monday
                    .checked_add_signed(Duration::weeks(offset.into()))
                    .map(CalendarValue::month)
            }
            "month" => shift_months(today.with_day(1).unwrap(), offset).map(CalendarValue::month),
            _ => Some(CalendarValue::year(today.year() + offset)),
        };
        push(m.start(), m.end(), TemporalKind::Relative, resolved);
    }

    found.sort_by(|a, b| a.start.cmp(&b.start).then((b.end - b.start).cmp(&(a.end - a.start))));
    let mut spans: Vec<TemporalSpan> = Vec::new();
    for span in found {
        if spans.last().is_none_or(|last| span.start >= last.end) {
            spans.push(span);
        }
    }
    spans
}

fn shift_months(d: NaiveDate, offset: i32) -> Option<NaiveDate> {
    if offset >= 0 {
        d.checked_add_months(Months::new(offset as u32))
    } else {
        d.checked_sub_months(Months::new(offset.unsigned_abs()))
    }
}

/// Replaces every recognized temporal phrase with its standard form.
pub fn normalize_query(query: &str, reference_time: NaiveDateTime) -> NormalizedQuery {
    let substitutions: Vec<Substitution> = recognize_temporal(query, reference_time)
        .into_iter()
        .map(|span| Substitution { replacement: span.resolved.standard_form(), span })
        .collect();
    let mut nq = NormalizedQuery {
        original: query.to_string(),
        normalized: String::new(),
        substitutions,
    };
    nq.normalized = nq.apply();
    nq
}
