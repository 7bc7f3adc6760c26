//! Plain-English summaries of parsed SQL.
//!
//! `SELECT * FROM customers WHERE customers.region = 'INDIA'` renders as
//! `Column(s): All Table(s): customers, Filtered on: customers.region = 'INDIA'`.

use std::fmt;

use serde::Serialize;

use crate::sql::{conditions_display, join_display, ParsedQuery, SelectCore, SelectExpr};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub columns: String,
    pub tables: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filters: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_by: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_by: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_op_parts: Option<SetOpParts>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetOpParts {
    pub op: String,
    pub left: Box<Explanation>,
    pub right: Box<Explanation>,
}

fn explain_core(core: &SelectCore) -> Explanation {
    let columns = if core.items.iter().all(|i| i.expr == SelectExpr::Star) {
        "All".to_string()
    } else {
        join_display(&core.items, ", ")
    };
    let columns = if core.distinct { format!("{columns} (distinct)") } else { columns };
    Explanation {
        columns,
        tables: core.tables().join(", "),
        filters: (!core.conditions.is_empty())
            .then(|| conditions_display(&core.conditions, &core.connectives)),
        group_by: (!core.group_by.is_empty()).then(|| join_display(&core.group_by, ", ")),
        order_by: (!core.order_by.is_empty()).then(|| join_display(&core.order_by, ", ")),
        limit: core.limit.map(|n| n.to_string()),
        set_op_parts: None,
    }
}

/// Summarizes a query. Set operations are explained part by part and joined
/// with the operator name; the top-level fields then describe the left part.
pub fn explain(parsed: &ParsedQuery) -> Explanation {
    let left = explain_core(&parsed.core);
    match &parsed.set_op {
        None => left,
        Some(s) => {
            let right = explain_core(&s.right);
            Explanation {
                set_op_parts: Some(SetOpParts {
                    op: s.op.name().to_string(),
                    left: Box::new(left.clone()),
                    right: Box::new(right),
                }),
                ..left
            }
        }
    }
}

impl Explanation {
    fn write_part(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Column(s): {} Table(s): {}", self.columns, self.tables)?;
        if let Some(x) = &self.filters {
            write!(f, ", Filtered on: {x}")?;
        }
        if let Some(x) = &self.group_by {
            write!(f, ", Grouped by: {x}")?;
        }
        if let Some(x) = &self.order_by {
            write!(f, ", Ordered by: {x}")?;
        }
        if let Some(x) = &self.limit {
            write!(f, ", Top: {x}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.set_op_parts {
            None => self.write_part(f),
            Some(p) => {
                p.left.write_part(f)?;
                write!(f, " {} ", p.op)?;
                p.right.write_part(f)
            }
        }
    }
}
