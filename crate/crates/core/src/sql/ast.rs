use std::fmt;

use serde::Serialize;

use super::tokenizer::is_reserved;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ColumnRef {
    /// Table name or alias as written (or as filled in by resolution).
    pub table: Option<String>,
    pub column: String,
}

impl ColumnRef {
    pub fn new(table: Option<&str>, column: &str) -> Self {
        ColumnRef { table: table.map(str::to_string), column: column.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AggregateFn {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggregateFn {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name.to_ascii_uppercase().as_str() {
            "COUNT" => AggregateFn::Count,
            "SUM" => AggregateFn::Sum,
            "AVG" => AggregateFn::Avg,
            "MIN" => AggregateFn::Min,
            "MAX" => AggregateFn::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AggregateFn::Count => "COUNT",
            AggregateFn::Sum => "SUM",
            AggregateFn::Avg => "AVG",
            AggregateFn::Min => "MIN",
            AggregateFn::Max => "MAX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum AggregateArg {
    Star,
    Column(ColumnRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Aggregate {
    pub func: AggregateFn,
    pub distinct: bool,
    pub arg: AggregateArg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SelectExpr {
    Star,
    QualifiedStar(String),
    Column(ColumnRef),
    Aggregate(Aggregate),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectItem {
    pub expr: SelectExpr,
    pub alias: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRef {
    pub name: String,
    pub alias: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JoinKind {
    Inner,
    Left,
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CompareOp {
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Like,
    NotLike,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::NotEq => "!=",
            CompareOp::Lt => "<",
            CompareOp::LtEq => "<=",
            CompareOp::Gt => ">",
            CompareOp::GtEq => ">=",
            CompareOp::Like => "LIKE",
            CompareOp::NotLike => "NOT LIKE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinCondition {
    pub left: ColumnRef,
    pub op: CompareOp,
    pub right: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Join {
    pub kind: JoinKind,
    pub table: TableRef,
    pub on: Vec<JoinCondition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Literal {
    /// Unescaped string content.
    String(String),
    /// Numeric literal exactly as written.
    Number(String),
}

impl Literal {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Literal::String(s) if s == TERMINAL)
    }
}

/// Placeholder a translator emits where a cell value belongs.
pub const TERMINAL: &str = "Terminal";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub column: ColumnRef,
    pub op: CompareOp,
    pub value: Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoolOp {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum OrderExpr {
    Column(ColumnRef),
    Aggregate(Aggregate),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderItem {
    pub expr: OrderExpr,
    pub direction: Option<Direction>,
}

/// One SELECT block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectCore {
    pub distinct: bool,
    pub items: Vec<SelectItem>,
    pub from: TableRef,
    pub joins: Vec<Join>,
    pub conditions: Vec<Condition>,
    /// `connectives[i]` joins `conditions[i]` and `conditions[i + 1]`.
    pub connectives: Vec<BoolOp>,
    pub group_by: Vec<ColumnRef>,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<u64>,
}

impl SelectCore {
    /// FROM and JOIN tables in order, without duplicates.
    pub fn tables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in std::iter::once(&self.from).chain(self.joins.iter().map(|j| &j.table)) {
            if !out.iter().any(|x| x.eq_ignore_ascii_case(&t.name)) {
                out.push(&t.name);
            }
        }
        out
    }

    pub fn table_refs(&self) -> impl Iterator<Item = &TableRef> {
        std::iter::once(&self.from).chain(self.joins.iter().map(|j| &j.table))
    }

    /// Resolves a qualifier (table name or alias) to the table name.
    pub fn table_for(&self, qualifier: &str) -> Option<&str> {
        let refs: Vec<&TableRef> = self.table_refs().collect();
        refs.iter()
            .find(|t| t.alias.as_deref().is_some_and(|a| a.eq_ignore_ascii_case(qualifier)))
            .or_else(|| refs.iter().find(|t| t.name.eq_ignore_ascii_case(qualifier)))
            .map(|t| t.name.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetOpKind {
    Union,
    UnionAll,
    Intersect,
}

impl SetOpKind {
    pub fn name(self) -> &'static str {
        match self {
            SetOpKind::Union => "UNION",
            SetOpKind::UnionAll => "UNION ALL",
            SetOpKind::Intersect => "INTERSECT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetOperation {
    pub op: SetOpKind,
    pub right: SelectCore,
}

/// A parsed statement: one SELECT block, optionally combined with a second
/// by UNION or INTERSECT.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParsedQuery {
    pub core: SelectCore,
    pub set_op: Option<SetOperation>,
}

impl ParsedQuery {
    pub fn cores(&self) -> impl Iterator<Item = &SelectCore> {
        std::iter::once(&self.core).chain(self.set_op.as_ref().map(|s| &s.right))
    }

    /// Tables across both set-operation parts, without duplicates.
    pub fn tables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in self.cores().flat_map(SelectCore::tables) {
            if !out.iter().any(|x| x.eq_ignore_ascii_case(t)) {
                out.push(t);
            }
        }
        out
    }

    /// WHERE conditions in textual order, each with the block it belongs to.
    pub fn conditions(&self) -> impl Iterator<Item = (&SelectCore, &Condition)> {
        self.cores().flat_map(|c| c.conditions.iter().map(move |cond| (c, cond)))
    }
}

pub(crate) fn write_ident(f: &mut fmt::Formatter<'_>, ident: &str) -> fmt::Result {
    let plain = ident
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && ident.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_reserved(ident);
    if plain {
        f.write_str(ident)
    } else {
        write!(f, "\"{}\"", ident.replace('"', "\"\""))
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(t) = &self.table {
            write_ident(f, t)?;
            f.write_str(".")?;
        }
        write_ident(f, &self.column)
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.func.name())?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        match &self.arg {
            AggregateArg::Star => f.write_str("*")?,
            AggregateArg::Column(c) => write!(f, "{c}")?,
        }
        f.write_str(")")
    }
}

impl fmt::Display for SelectExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectExpr::Star => f.write_str("*"),
            SelectExpr::QualifiedStar(t) => {
                write_ident(f, t)?;
                f.write_str(".*")
            }
            SelectExpr::Column(c) => write!(f, "{c}"),
            SelectExpr::Aggregate(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Display for SelectItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)?;
        if let Some(a) = &self.alias {
            f.write_str(" AS ")?;
            write_ident(f, a)?;
        }
        Ok(())
    }
}

impl fmt::Display for TableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ident(f, &self.name)?;
        if let Some(a) = &self.alias {
            f.write_str(" AS ")?;
            write_ident(f, a)?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::String(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Literal::Number(n) => f.write_str(n),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.column, self.op.symbol(), self.value)
    }
}

impl fmt::Display for JoinCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op.symbol(), self.right)
    }
}

impl fmt::Display for OrderItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.expr {
            OrderExpr::Column(c) => write!(f, "{c}")?,
            OrderExpr::Aggregate(a) => write!(f, "{a}")?,
        }
        match self.direction {
            Some(Direction::Asc) => f.write_str(" ASC"),
            Some(Direction::Desc) => f.write_str(" DESC"),
            None => Ok(()),
        }
    }
}

pub(crate) fn join_display<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

/// Conditions joined by their connectives.
pub(crate) fn conditions_display(conditions: &[Condition], connectives: &[BoolOp]) -> String {
    let mut out = String::new();
    for (i, c) in conditions.iter().enumerate() {
        if i > 0 {
            out.push_str(match connectives.get(i - 1) {
                Some(BoolOp::Or) => " OR ",
                _ => " AND ",
            });
        }
        out.push_str(&c.to_string());
    }
    out
}

impl fmt::Display for SelectCore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        write!(f, "{} FROM {}", join_display(&self.items, ", "), self.from)?;
        for j in &self.joins {
            let kw = match j.kind {
                JoinKind::Inner => "JOIN",
                JoinKind::Left => "LEFT JOIN",
                JoinKind::Cross => "CROSS JOIN",
            };
            write!(f, " {kw} {}", j.table)?;
            if !j.on.is_empty() {
                write!(f, " ON {}", join_display(&j.on, " AND "))?;
            }
        }
        if !self.conditions.is_empty() {
            write!(f, " WHERE {}", conditions_display(&self.conditions, &self.connectives))?;
        }
        if !self.group_by.is_empty() {
            write!(f, " GROUP BY {}", join_display(&self.group_by, ", "))?;
        }
        if !self.order_by.is_empty() {
            write!(f, " ORDER BY {}", join_display(&self.order_by, ", "))?;
        }
        if let Some(n) = self.limit {
            write!(f, " LIMIT {n}")?;
        }
        Ok(())
    }
}

impl fmt::Display for ParsedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.core)?;
        if let Some(s) = &self.set_op {
            write!(f, " {} {}", s.op.name(), s.right)?;
        }
        Ok(())
    }
}
