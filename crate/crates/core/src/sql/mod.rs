//! Tokenizer, parser and renderer for the SELECT subset the pipeline uses.

mod ast;
mod parser;
mod tokenizer;

use thiserror::Error;

pub use ast::*;
pub use parser::parse_unresolved;
pub use tokenizer::{is_reserved, tokenize, SqlToken, TokenKind};

use crate::onboarding::OnboardedDatabase;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SqlError {
    #[error("unterminated quoted literal starting at byte {position}")]
    UnterminatedLiteral { position: usize },
    #[error("unsupported syntax at byte {position}: {construct}")]
    UnsupportedSyntax { construct: String, position: usize },
    #[error("syntax error at byte {position}: {message}")]
    Syntax { message: String, position: usize },
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("column {column:?} is ambiguous between tables {tables:?}")]
    AmbiguousColumn { column: String, tables: Vec<String> },
}

/// Parses SQL and resolves every column reference against the schema.
///
/// Unqualified columns are qualified with the single table (or its alias)
/// in the same SELECT block that has them. Names compare case-insensitively.
pub fn parse(sql: &str, schema: &OnboardedDatabase) -> Result<ParsedQuery, SqlError> {
    let mut q = parse_unresolved(sql)?;
    resolve_core(&mut q.core, schema)?;
    if let Some(s) = &mut q.set_op {
        resolve_core(&mut s.right, schema)?;
    }
    Ok(q)
}

fn resolve_core(core: &mut SelectCore, schema: &OnboardedDatabase) -> Result<(), SqlError> {
    for t in core.table_refs() {
        if schema.table(&t.name).is_none() {
            return Err(SqlError::UnknownIdentifier(t.name.clone()));
        }
    }
    let snapshot = core.clone();
    let aliases: Vec<String> = core.items.iter().filter_map(|i| i.alias.clone()).collect();
    let resolve = |c: &mut ColumnRef, allow_alias: bool| -> Result<(), SqlError> {
        match &c.table {
            Some(q) => {
                let table = snapshot
                    .table_for(q)
                    .ok_or_else(|| SqlError::UnknownIdentifier(q.clone()))?;
                if schema.column(table, &c.column).is_none() {
                    return Err(SqlError::UnknownIdentifier(format!("{q}.{}", c.column)));
                }
                Ok(())
            }
            None => {
                if allow_alias && aliases.iter().any(|a| a.eq_ignore_ascii_case(&c.column)) {
                    return Ok(());
                }
                let owners: Vec<&TableRef> = snapshot
                    .table_refs()
                    .filter(|t| schema.column(&t.name, &c.column).is_some())
                    .collect();
                match owners.as_slice() {
                    [] => Err(SqlError::UnknownIdentifier(c.column.clone())),
                    [one] => {
                        c.table = Some(one.alias.clone().unwrap_or_else(|| one.name.clone()));
                        Ok(())
                    }
                    many => Err(SqlError::AmbiguousColumn {
                        column: c.column.clone(),
                        tables: many.iter().map(|t| t.name.clone()).collect(),
                    }),
                }
            }
        }
    };
    let resolve_agg = |a: &mut Aggregate| -> Result<(), SqlError> {
        match &mut a.arg {
            AggregateArg::Column(c) => resolve(c, false),
            AggregateArg::Star => Ok(()),
        }
    };
    for item in &mut core.items {
        match &mut item.expr {
            SelectExpr::Column(c) => resolve(c, false)?,
            SelectExpr::Aggregate(a) => resolve_agg(a)?,
            SelectExpr::QualifiedStar(t) => {
                if snapshot.table_for(t).is_none() {
                    return Err(SqlError::UnknownIdentifier(t.clone()));
                }
            }
            SelectExpr::Star => {}
        }
    }
    for j in &mut core.joins {
        for on in &mut j.on {
            resolve(&mut on.left, false)?;
            resolve(&mut on.right, false)?;
        }
    }
    for cond in &mut core.conditions {
        resolve(&mut cond.column, false)?;
    }
    for g in &mut core.group_by {
        resolve(g, true)?;
    }
    for o in &mut core.order_by {
        match &mut o.expr {
            OrderExpr::Column(c) => resolve(c, true)?,
            OrderExpr::Aggregate(a) => resolve_agg(a)?,
        }
    }
    Ok(())
}

/// A `'Terminal'` placeholder: its index among all WHERE conditions (in
/// textual order) and the column it filters, with the qualifier resolved to
/// the real table name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalSlot {
    pub condition_index: usize,
    pub table: Option<String>,
    pub column: ColumnRef,
}

/// Every condition whose literal is exactly `'Terminal'`, in textual order.
pub fn find_terminals(parsed: &ParsedQuery) -> Vec<TerminalSlot> {
    parsed
        .conditions()
        .enumerate()
        .filter(|(_, (_, cond))| cond.value.is_terminal())
        .map(|(i, (core, cond))| TerminalSlot {
            condition_index: i,
            table: cond
                .column
                .table
                .as_deref()
                .and_then(|q| core.table_for(q))
                .map(str::to_string),
            column: cond.column.clone(),
        })
        .collect()
}

/// Byte ranges of `'Terminal'` literal tokens in `sql`, in textual order.
pub fn terminal_literal_ranges(sql: &str) -> Result<Vec<std::ops::Range<usize>>, SqlError> {
    let quoted = format!("'{TERMINAL}'");
    Ok(tokenize(sql)?
        .into_iter()
        .filter(|t| t.kind == TokenKind::Literal && t.text == quoted)
        .map(|t| t.position..t.position + t.text.len())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_terminals_in_order() {
        let q = parse_unresolved(
            "SELECT count(*) FROM quakes WHERE quakes.place = 'Terminal'",
        )
        .unwrap();
        let t = find_terminals(&q);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].condition_index, 0);
        assert_eq!(t[0].column, ColumnRef::new(Some("quakes"), "place"));
        assert_eq!(t[0].table.as_deref(), Some("quakes"));

        let q = parse_unresolved("SELECT * FROM t").unwrap();
        assert!(find_terminals(&q).is_empty());

        let sql = "SELECT * FROM t AS x WHERE x.a = 3 AND x.lo > 'Terminal' AND x.hi < 'Terminal'";
        let q = parse_unresolved(sql).unwrap();
        let t = find_terminals(&q);
        assert_eq!(t.iter().map(|s| s.condition_index).collect::<Vec<_>>(), [1, 2]);
        assert_eq!(t[0].column.column, "lo");
        assert_eq!(t[1].table.as_deref(), Some("t"));
        let ranges = terminal_literal_ranges(sql).unwrap();
        assert_eq!(ranges.len(), 2);
        assert!(ranges[0].start < ranges[1].start);
        assert_eq!(&sql[ranges[0].clone()], "'Terminal'");
    }

    #[test]
    fn lowercase_terminal_is_not_a_placeholder() {
        let q = parse_unresolved("SELECT * FROM t WHERE t.a = 'terminal'").unwrap();
        assert!(find_terminals(&q).is_empty());
    }
}

