use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{ColumnMeta, DataType, DatePart, OnboardingError};
use crate::value::Value;

pub const MONTH_NAMES_LONG: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];

pub const MONTH_NAMES_SHORT: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Field {
    Year,
    Month,
    Day,
    Literal(String),
}

/// A date layout such as `yyyy-mm-dd` or `dd/mm/yyyy`.
///
/// Only the tokens `yyyy`, `mm` and `dd` are fields; everything else is a
/// literal separator. Each field must occur exactly once and two-digit years
/// are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DateFormat {
    pattern: String,
    fields: Vec<Field>,
}

impl DateFormat {
    pub fn parse(pattern: &str) -> Result<Self, OnboardingError> {
        let bad = |reason: &str| OnboardingError::InvalidDateFormat {
            pattern: pattern.to_string(),
            reason: reason.to_string(),
        };
        let mut fields = Vec::new();
        let mut literal = String::new();
        let mut rest = pattern;
        while let Some(ch) = rest.chars().next() {
            let field = if rest.starts_with("yyyy") {
                Some((Field::Year, 4))
            } else if rest.starts_with("yy") {
                return Err(bad("two-digit years are not supported"));
            } else if rest.starts_with("mm") {
                Some((Field::Month, 2))
            } else if rest.starts_with("dd") {
                Some((Field::Day, 2))
            } else {
                None
            };
            match field {
                Some((f, len)) => {
                    if !literal.is_empty() {
                        fields.push(Field::Literal(std::mem::take(&mut literal)));
                    }
                    fields.push(f);
                    rest = &rest[len..];
                }
                None => {
                    literal.push(ch);
                    rest = &rest[ch.len_utf8()..];
                }
            }
        }
        if !literal.is_empty() {
            fields.push(Field::Literal(literal));
        }
        for (f, name) in [(Field::Year, "yyyy"), (Field::Month, "mm"), (Field::Day, "dd")] {
            match fields.iter().filter(|x| **x == f).count() {
                1 => {}
                0 => return Err(bad(&format!("missing `{name}`"))),
                _ => return Err(bad(&format!("`{name}` appears more than once"))),
            }
        }
        Ok(DateFormat { pattern: pattern.to_string(), fields })
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    /// Parses a value laid out by this format. Month and day take one or two
    /// digits when a separator follows them and exactly two when another
    /// field follows directly.
    pub fn parse_value(&self, raw: &str) -> Option<NaiveDate> {
        let mut rest = raw.trim();
        let (mut year, mut month, mut day) = (None, None, None);
        for (i, field) in self.fields.iter().enumerate() {
            let is_field = |f: Option<&Field>| matches!(f, Some(Field::Year | Field::Month | Field::Day));
            // Fields packed against another field need their full width.
            let packed = is_field(self.fields.get(i + 1)) || (i > 0 && is_field(self.fields.get(i - 1)));
            match field {
                Field::Literal(lit) => rest = rest.strip_prefix(lit.as_str())?,
                Field::Year => {
                    let (n, r) = take_digits(rest, 4, 4)?;
                    year = Some(n as i32);
                    rest = r;
                }
                Field::Month | Field::Day => {
                    let min = if packed { 2 } else { 1 };
                    let (n, r) = take_digits(rest, min, 2)?;
                    if *field == Field::Month {
                        month = Some(n);
                    } else {
                        day = Some(n);
                    }
                    rest = r;
                }
            }
        }
        if !rest.is_empty() {
            return None;
        }
        NaiveDate::from_ymd_opt(year?, month?, day?)
    }

    /// Lays out a date with zero-padded fields.
    pub fn format(&self, date: NaiveDate) -> String {
        let mut out = String::new();
        for field in &self.fields {
            match field {
                Field::Literal(lit) => out.push_str(lit),
                Field::Year => out.push_str(&format!("{:04}", date.year())),
                Field::Month => out.push_str(&format!("{:02}", date.month())),
                Field::Day => out.push_str(&format!("{:02}", date.day())),
            }
        }
        out
    }
}

fn take_digits(s: &str, min: usize, max: usize) -> Option<(u32, &str)> {
    let n = s.bytes().take(max).take_while(u8::is_ascii_digit).count();
    if n < min {
        return None;
    }
    Some((s[..n].parse().ok()?, &s[n..]))
}

impl FromStr for DateFormat {
    type Err = OnboardingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DateFormat::parse(s)
    }
}

impl fmt::Display for DateFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern)
    }
}

impl Serialize for DateFormat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.pattern)
    }
}

impl<'de> Deserialize<'de> for DateFormat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        DateFormat::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// The five per-row parts derived from one datetime value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DateParts {
    pub day: u32,
    pub month: u32,
    pub year: i32,
    pub month_name_short: &'static str,
    pub month_name_long: &'static str,
}

impl DateParts {
    pub fn of(date: NaiveDate) -> Self {
        let m = date.month0() as usize;
        DateParts {
            day: date.day(),
            month: date.month(),
            year: date.year(),
            month_name_short: MONTH_NAMES_SHORT[m],
            month_name_long: MONTH_NAMES_LONG[m],
        }
    }

    pub fn date(&self) -> Option<NaiveDate> {
        NaiveDate::from_ymd_opt(self.year, self.month, self.day)
    }
}

/// A column materialized alongside a datetime column.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedColumn {
    pub meta: ColumnMeta,
    pub values: Vec<Value>,
}

/// Parsed rows plus the derived day, month, year and month-name columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedDatetime {
    pub dates: Vec<Option<NaiveDate>>,
    pub columns: Vec<DerivedColumn>,
}

/// Splits a datetime column into `<col>_day`, `<col>_month`, `<col>_year`,
/// `<col>_month_name_short` and `<col>_month_name_long`. Null or blank cells
/// yield nulls in every derived column.
pub fn expand_datetime_column(
    column: &ColumnMeta,
    format: &DateFormat,
    values: &[Value],
) -> Result<ExpandedDatetime, OnboardingError> {
    let mut dates = Vec::with_capacity(values.len());
    for (row, value) in values.iter().enumerate() {
        let raw = match value {
            Value::Null => None,
            Value::Text(s) if s.trim().is_empty() => None,
            Value::Text(s) => Some(s.clone()),
            other => Some(other.to_string()),
        };
        let date = match raw {
            None => None,
            Some(raw) => Some(format.parse_value(&raw).ok_or_else(|| {
                OnboardingError::FormatMismatch {
                    column: column.original_name.clone(),
                    row,
                    value: raw.clone(),
                    format: format.pattern().to_string(),
                }
            })?),
        };
        dates.push(date);
    }

    let parts: Vec<Option<DateParts>> = dates.iter().map(|d| d.map(DateParts::of)).collect();
    let base = &column.cleaned_name;
    let make = |part: DatePart, data_type, f: &dyn Fn(&DateParts) -> Value| {
        let name = format!("{base}_{}", part.suffix());
        DerivedColumn {
            meta: ColumnMeta {
                original_name: name.clone(),
                cleaned_name: name,
                synonyms: Vec::new(),
                data_type,
                datetime_format: None,
                derived: Some(part),
            },
            values: parts
                .iter()
                .map(|p| p.as_ref().map_or(Value::Null, f))
                .collect(),
        }
    };
    let columns = vec![
        make(DatePart::Day, DataType::Numeric, &|p| Value::Integer(p.day.into())),
        make(DatePart::Month, DataType::Numeric, &|p| Value::Integer(p.month.into())),
        make(DatePart::Year, DataType::Numeric, &|p| Value::Integer(p.year.into())),
        make(DatePart::MonthNameShort, DataType::Textual, &|p| {
            Value::Text(p.month_name_short.to_string())
        }),
        make(DatePart::MonthNameLong, DataType::Textual, &|p| {
            Value::Text(p.month_name_long.to_string())
        }),
    ];
    Ok(ExpandedDatetime { dates, columns })
}
