use super::ast::*;
use super::tokenizer::{tokenize, SqlToken, TokenKind};
use super::SqlError;

struct Cursor<'a> {
    tokens: Vec<SqlToken<'a>>,
    pos: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    fn new(sql: &'a str) -> Result<Self, SqlError> {
        let tokens: Vec<_> = tokenize(sql)?.into_iter().filter(|t| !t.is_trivia()).collect();
        Ok(Cursor { tokens, pos: 0, end: sql.len() })
    }

    fn peek(&self) -> Option<&SqlToken<'a>> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&SqlToken<'a>> {
        self.tokens.get(self.pos + n)
    }

    fn position(&self) -> usize {
        self.peek().map_or(self.end, |t| t.position)
    }

    fn next(&mut self) -> Option<SqlToken<'a>> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek()
            .is_some_and(|t| matches!(t.kind, TokenKind::Punctuation | TokenKind::Operator) && t.text == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expected(&self, what: &str) -> SqlError {
        SqlError::Syntax {
            message: match self.peek() {
                Some(t) => format!("expected {what}, found {:?}", t.text),
                None => format!("expected {what}, found end of input"),
            },
            position: self.position(),
        }
    }

    fn unsupported(&self, construct: impl Into<String>) -> SqlError {
        SqlError::UnsupportedSyntax { construct: construct.into(), position: self.position() }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.expected(kw))
        }
    }

    /// Rejects constructs outside the grammar before they are mistaken for
    /// something else.
    fn guard(&self) -> Result<(), SqlError> {
        let Some(t) = self.peek() else { return Ok(()) };
        let upper = t.text.to_ascii_uppercase();
        match upper.as_str() {
            "OVER" | "PARTITION" | "WINDOW" => Err(self.unsupported("window function")),
            "HAVING" => Err(self.unsupported("HAVING")),
            "EXCEPT" => Err(self.unsupported("EXCEPT")),
            "BETWEEN" | "IN" | "IS" | "EXISTS" => Err(self.unsupported(upper)),
            "CASE" => Err(self.unsupported("CASE")),
            "OFFSET" => Err(self.unsupported("OFFSET")),
            "WITH" => Err(self.unsupported("WITH")),
            "(" => Err(self.unsupported("parenthesized expression or subquery")),
            _ => Ok(()),
        }
    }

    fn identifier(&mut self) -> Result<String, SqlError> {
        self.guard()?;
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                let t = self.next().unwrap();
                Ok(unquote_ident(t.text))
            }
            _ => Err(self.expected("identifier")),
        }
    }
}

fn unquote_ident(text: &str) -> String {
    let bytes = text.as_bytes();
    match bytes.first() {
        Some(&q @ (b'"' | b'`')) if text.len() >= 2 => {
            let inner = &text[1..text.len() - 1];
            let q = q as char;
            inner.replace(&format!("{q}{q}"), &q.to_string())
        }
        _ => text.to_string(),
    }
}

fn unquote_string(text: &str) -> String {
    text[1..text.len() - 1].replace("''", "'")
}

/// Parses SQL into a [`ParsedQuery`] without consulting a schema; column
/// references stay exactly as written.
pub fn parse_unresolved(sql: &str) -> Result<ParsedQuery, SqlError> {
    let mut c = Cursor::new(sql)?;
    match c.peek() {
        None => return Err(c.expected("SELECT")),
        Some(t) if t.kind == TokenKind::Dml && !t.is_keyword("SELECT") => {
            return Err(c.unsupported(format!("{} statement", t.text.to_ascii_uppercase())));
        }
        Some(t) if t.kind == TokenKind::Keyword && !t.is_keyword("SELECT") => {
            c.guard()?;
            return Err(c.unsupported(format!("{} statement", t.text.to_ascii_uppercase())));
        }
        _ => {}
    }
    let core = select_core(&mut c)?;
    let set_op = if c.at_keyword("UNION") || c.at_keyword("INTERSECT") {
        let op = if c.eat_keyword("UNION") {
            if c.eat_keyword("ALL") {
                SetOpKind::UnionAll
            } else {
                SetOpKind::Union
            }
        } else {
            c.next();
            SetOpKind::Intersect
        };
        let right = select_core(&mut c)?;
        if c.at_keyword("UNION") || c.at_keyword("INTERSECT") {
            return Err(c.unsupported("more than one set operation"));
        }
        Some(SetOperation { op, right })
    } else {
        None
    };
    c.eat_punct(";");
    c.guard()?;
    if c.peek().is_some() {
        return Err(c.expected("end of statement"));
    }
    Ok(ParsedQuery { core, set_op })
}

fn select_core(c: &mut Cursor<'_>) -> Result<SelectCore, SqlError> {
    c.expect_keyword("SELECT")?;
    let distinct = c.eat_keyword("DISTINCT");
    c.eat_keyword("ALL");
    let mut items = vec![select_item(c)?];
    while c.eat_punct(",") {
        items.push(select_item(c)?);
    }
    c.guard()?;
    c.expect_keyword("FROM")?;
    let from = table_ref(c)?;
    if c.at_punct(",") {
        return Err(c.unsupported("comma join"));
    }
    let mut joins = Vec::new();
    loop {
        let kind = if c.eat_keyword("JOIN") {
            JoinKind::Inner
        } else if c.at_keyword("INNER") {
            c.next();
            c.expect_keyword("JOIN")?;
            JoinKind::Inner
        } else if c.at_keyword("LEFT") {
            c.next();
            c.eat_keyword("OUTER");
            c.expect_keyword("JOIN")?;
            JoinKind::Left
        } else if c.at_keyword("CROSS") {
            c.next();
            c.expect_keyword("JOIN")?;
            JoinKind::Cross
        } else if c.at_keyword("RIGHT") || c.at_keyword("FULL") {
            return Err(c.unsupported("RIGHT/FULL JOIN"));
        } else {
            break;
        };
        let table = table_ref(c)?;
        let mut on = Vec::new();
        if c.eat_keyword("ON") {
            loop {
                c.guard()?;
                let left = column_ref(c)?;
                let op = compare_op(c)?;
                if matches!(c.peek(), Some(t) if t.kind == TokenKind::Literal) {
                    return Err(c.unsupported("literal in JOIN condition"));
                }
                let right = column_ref(c)?;
                on.push(JoinCondition { left, op, right });
                if c.at_keyword("OR") {
                    return Err(c.unsupported("OR in JOIN condition"));
                }
                if !c.eat_keyword("AND") {
                    break;
                }
            }
        }
        joins.push(Join { kind, table, on });
    }

    let mut conditions = Vec::new();
    let mut connectives = Vec::new();
    if c.eat_keyword("WHERE") {
        loop {
            conditions.push(condition(c)?);
            if c.eat_keyword("AND") {
                connectives.push(BoolOp::And);
            } else if c.eat_keyword("OR") {
                connectives.push(BoolOp::Or);
            } else {
                break;
            }
        }
    }
    c.guard()?;
    let mut group_by = Vec::new();
    if c.eat_keyword("GROUP") {
        c.expect_keyword("BY")?;
        loop {
            group_by.push(column_ref(c)?);
            if !c.eat_punct(",") {
                break;
            }
        }
    }
    c.guard()?;
    let mut order_by = Vec::new();
    if c.eat_keyword("ORDER") {
        c.expect_keyword("BY")?;
        loop {
            let expr = match aggregate(c)? {
                Some(a) => OrderExpr::Aggregate(a),
                None => OrderExpr::Column(column_ref(c)?),
            };
            let direction = if c.eat_keyword("ASC") {
                Some(Direction::Asc)
            } else if c.eat_keyword("DESC") {
                Some(Direction::Desc)
            } else {
                None
            };
            order_by.push(OrderItem { expr, direction });
            if !c.eat_punct(",") {
                break;
            }
        }
    }
    c.guard()?;
    let limit = if c.eat_keyword("LIMIT") {
        match c.peek() {
            Some(t) if t.kind == TokenKind::Literal => {
                let n = t.text.parse::<u64>().map_err(|_| c.expected("integer LIMIT"))?;
                c.next();
                Some(n)
            }
            _ => return Err(c.expected("integer LIMIT")),
        }
    } else {
        None
    };
    c.guard()?;
    Ok(SelectCore { distinct, items, from, joins, conditions, connectives, group_by, order_by, limit })
}

fn select_item(c: &mut Cursor<'_>) -> Result<SelectItem, SqlError> {
    c.guard()?;
    let expr = if c.eat_punct("*") {
        SelectExpr::Star
    } else if let Some(a) = aggregate(c)? {
        SelectExpr::Aggregate(a)
    } else {
        let is_qualified_star = matches!(c.peek_at(1), Some(t) if t.text == ".")
            && matches!(c.peek_at(2), Some(t) if t.text == "*");
        if is_qualified_star {
            let t = c.identifier()?;
            c.next();
            c.next();
            SelectExpr::QualifiedStar(t)
        } else {
            SelectExpr::Column(column_ref(c)?)
        }
    };
    Ok(SelectItem { expr, alias: alias(c)? })
}

fn alias(c: &mut Cursor<'_>) -> Result<Option<String>, SqlError> {
    if c.eat_keyword("AS") {
        return c.identifier().map(Some);
    }
    match c.peek() {
        Some(t) if t.kind == TokenKind::Identifier => c.identifier().map(Some),
        _ => Ok(None),
    }
}

fn table_ref(c: &mut Cursor<'_>) -> Result<TableRef, SqlError> {
    let name = c.identifier()?;
    if c.at_punct(".") {
        return Err(c.unsupported("schema-qualified table"));
    }
    Ok(TableRef { name, alias: alias(c)? })
}

/// Parses `FUNC([DISTINCT] *|column)` when the cursor is at an aggregate
/// call; other function calls are rejected.
fn aggregate(c: &mut Cursor<'_>) -> Result<Option<Aggregate>, SqlError> {
    let is_call = matches!(c.peek(), Some(t) if t.kind == TokenKind::Identifier)
        && matches!(c.peek_at(1), Some(t) if t.text == "(");
    if !is_call {
        return Ok(None);
    }
    let name = c.peek().unwrap().text.to_string();
    let Some(func) = AggregateFn::from_name(&name) else {
        let upper = name.to_ascii_uppercase();
        let construct = match upper.as_str() {
            "RANK" | "DENSE_RANK" | "ROW_NUMBER" | "NTILE" | "LAG" | "LEAD" | "FIRST_VALUE"
            | "LAST_VALUE" => "window function".to_string(),
            _ => format!("function {upper}"),
        };
        return Err(c.unsupported(construct));
    };
    c.next();
    c.next();
    let distinct = c.eat_keyword("DISTINCT");
    let arg = if c.eat_punct("*") {
        AggregateArg::Star
    } else {
        AggregateArg::Column(column_ref(c)?)
    };
    if !c.eat_punct(")") {
        return Err(c.expected("`)`"));
    }
    c.guard()?;
    Ok(Some(Aggregate { func, distinct, arg }))
}

fn column_ref(c: &mut Cursor<'_>) -> Result<ColumnRef, SqlError> {
    let first = c.identifier()?;
    if c.eat_punct(".") {
        let column = c.identifier()?;
        Ok(ColumnRef { table: Some(first), column })
    } else {
        Ok(ColumnRef { table: None, column: first })
    }
}

fn compare_op(c: &mut Cursor<'_>) -> Result<CompareOp, SqlError> {
    c.guard()?;
    if c.eat_keyword("NOT") {
        c.guard()?;
        if c.eat_keyword("LIKE") {
            return Ok(CompareOp::NotLike);
        }
        return Err(c.unsupported("NOT"));
    }
    if c.eat_keyword("LIKE") {
        return Ok(CompareOp::Like);
    }
    let op = match c.peek() {
        Some(t) if t.kind == TokenKind::Operator => match t.text {
            "=" | "==" => CompareOp::Eq,
            "!=" | "<>" => CompareOp::NotEq,
            "<" => CompareOp::Lt,
            "<=" => CompareOp::LtEq,
            ">" => CompareOp::Gt,
            ">=" => CompareOp::GtEq,
            _ => return Err(c.expected("comparison operator")),
        },
        _ => return Err(c.expected("comparison operator")),
    };
    c.next();
    Ok(op)
}

fn condition(c: &mut Cursor<'_>) -> Result<Condition, SqlError> {
    c.guard()?;
    if c.at_keyword("NOT") {
        return Err(c.unsupported("NOT"));
    }
    let column = column_ref(c)?;
    let op = compare_op(c)?;
    c.guard()?;
    let negative = c.at_punct("-");
    if negative {
        c.next();
    }
    let value = match c.peek() {
        Some(t) if t.kind == TokenKind::Literal => {
            let text = t.text;
            let lit = if text.starts_with('\'') {
                if negative {
                    return Err(c.expected("number after `-`"));
                }
                Literal::String(unquote_string(text))
            } else if negative {
                Literal::Number(format!("-{text}"))
            } else {
                Literal::Number(text.to_string())
            };
            c.next();
            lit
        }
        Some(t) if t.kind == TokenKind::Identifier => {
            return Err(c.unsupported("column comparison in WHERE"));
        }
        _ => return Err(c.expected("literal")),
    };
    Ok(Condition { column, op, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn customer_email_query() {
        let q = parse_unresolved(
            "SELECT customer.email FROM customer WHERE customer.first_name = 'MARY'",
        )
        .unwrap();
        assert_eq!(q.tables(), ["customer"]);
        assert_eq!(q.core.conditions.len(), 1);
        let cond = &q.core.conditions[0];
        assert_eq!(cond.column, ColumnRef::new(Some("customer"), "first_name"));
        assert_eq!(cond.op, CompareOp::Eq);
        assert_eq!(cond.value, Literal::String("MARY".into()));
    }

    #[test]
    fn star_select() {
        let q = parse_unresolved("SELECT * FROM t").unwrap();
        assert_eq!(q.core.items[0].expr, SelectExpr::Star);
        assert_eq!(q.tables(), ["t"]);
        assert!(q.core.conditions.is_empty());
    }

    #[test]
    fn window_functions_are_unsupported() {
        for sql in [
            "SELECT RANK() OVER (ORDER BY t.a) FROM t",
            "SELECT COUNT(*) OVER (PARTITION BY t.a) FROM t",
            "SELECT t.a FROM t WINDOW w AS (PARTITION BY t.a)",
        ] {
            assert!(
                matches!(parse_unresolved(sql), Err(SqlError::UnsupportedSyntax { .. })),
                "{sql}"
            );
        }
    }

    #[test]
    fn join_with_redundant_on() {
        let q = parse_unresolved(
            "SELECT film.title FROM actor JOIN film JOIN film_actor ON actor.actor_id \
             = film_actor.actor_id AND film_actor.film_id = film.film_id AND \
             actor.actor_id = film_actor.actor_id WHERE actor.first_name = 'JOHNNY'",
        )
        .unwrap();
        assert_eq!(q.tables(), ["actor", "film", "film_actor"]);
        assert_eq!(q.core.joins[1].on.len(), 3);
    }

    #[test]
    fn group_order_limit() {
        let q = parse_unresolved(
            "SELECT Brands.brand_name FROM Dealer_Brand JOIN Brands ON \
             Dealer_Brand.brand_id = Brands.brand_id GROUP BY Brands.brand_name ORDER BY \
             Count(*) Desc LIMIT 1",
        )
        .unwrap();
        assert_eq!(q.core.limit, Some(1));
        assert_eq!(q.core.group_by.len(), 1);
        assert_eq!(q.core.order_by[0].direction, Some(Direction::Desc));
        assert_eq!(
            q.to_string(),
            "SELECT Brands.brand_name FROM Dealer_Brand JOIN Brands ON Dealer_Brand.brand_id \
             = Brands.brand_id GROUP BY Brands.brand_name ORDER BY COUNT(*) DESC LIMIT 1"
        );
    }

    #[test]
    fn set_operation() {
        let q = parse_unresolved("SELECT a.x FROM a UNION SELECT b.x FROM b").unwrap();
        assert_eq!(q.set_op.as_ref().unwrap().op, SetOpKind::Union);
        assert_eq!(q.tables(), ["a", "b"]);
    }

    #[test]
    fn out_of_grammar() {
        for sql in [
            "DROP TABLE x",
            "DELETE FROM x",
            "SELECT a FROM t WHERE a IN (SELECT b FROM u)",
            "SELECT a FROM t GROUP BY a HAVING COUNT(*) > 1",
            "SELECT a FROM t EXCEPT SELECT a FROM u",
            "SELECT a FROM t, u",
            "SELECT a FROM t WHERE a BETWEEN 1 AND 2",
        ] {
            assert!(
                matches!(parse_unresolved(sql), Err(SqlError::UnsupportedSyntax { .. })),
                "{sql}"
            );
        }
        assert!(matches!(parse_unresolved("SELECT FROM"), Err(SqlError::Syntax { .. })));
    }

    #[test]
    fn quoted_identifiers_are_normalized() {
        let q = parse_unresolved("SELECT \"t\".`a b` FROM \"t\" WHERE t.c = -3").unwrap();
        assert_eq!(q.core.items[0].expr, SelectExpr::Column(ColumnRef::new(Some("t"), "a b")));
        assert_eq!(q.core.conditions[0].value, Literal::Number("-3".into()));
        assert_eq!(q.to_string(), "SELECT t.\"a b\" FROM t WHERE t.c = -3");
    }
}
