use serde::Serialize;

use super::SqlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TokenKind {
    Dml,
    Keyword,
    Identifier,
    Operator,
    Literal,
    Whitespace,
    Punctuation,
    Where,
    SetOp,
}

/// One lexeme. `text` is the exact source slice, so concatenating a token
/// stream reproduces the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SqlToken<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub position: usize,
}

impl SqlToken<'_> {
    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.kind, TokenKind::Keyword | TokenKind::Dml | TokenKind::Where | TokenKind::SetOp)
            && self.text.eq_ignore_ascii_case(kw)
    }

    pub fn is_trivia(&self) -> bool {
        self.kind == TokenKind::Whitespace
    }
}

const DML: &[&str] = &["SELECT", "INSERT", "UPDATE", "DELETE", "REPLACE", "MERGE", "UPSERT"];
const SET_OPS: &[&str] = &["UNION", "INTERSECT", "EXCEPT"];
const KEYWORDS: &[&str] = &[
    "ALL", "ALTER", "AND", "AS", "ASC", "ATTACH", "BETWEEN", "BY", "CASE", "CREATE", "CROSS",
    "DESC", "DETACH", "DISTINCT", "DROP", "ELSE", "END", "EXISTS", "FROM", "FULL", "GROUP",
    "HAVING", "IN", "INNER", "INTO", "IS", "JOIN", "LEFT", "LIKE", "LIMIT", "NOT", "NULL",
    "OFFSET", "ON", "OR", "ORDER", "OUTER", "OVER", "PARTITION", "PRAGMA", "RIGHT", "SET",
    "TABLE", "THEN", "TRUNCATE", "VACUUM", "VALUES", "WHEN", "WINDOW", "WITH",
];

pub fn is_reserved(word: &str) -> bool {
    let upper = word.to_ascii_uppercase();
    let w = upper.as_str();
    DML.contains(&w) || SET_OPS.contains(&w) || KEYWORDS.contains(&w) || w == "WHERE"
}

fn classify_word(word: &str) -> TokenKind {
    let upper = word.to_ascii_uppercase();
    let w = upper.as_str();
    if w == "WHERE" {
        TokenKind::Where
    } else if DML.contains(&w) {
        TokenKind::Dml
    } else if SET_OPS.contains(&w) {
        TokenKind::SetOp
    } else if KEYWORDS.contains(&w) {
        TokenKind::Keyword
    } else {
        TokenKind::Identifier
    }
}

/// Splits SQL into a lossless token stream.
///
/// Keywords are recognized case-insensitively. String literals keep their
/// quotes; `''` inside a literal is an escaped quote. Double-quoted and
/// backtick-quoted identifiers are single Identifier tokens.
pub fn tokenize(sql: &str) -> Result<Vec<SqlToken<'_>>, SqlError> {
    let bytes = sql.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let c = bytes[i];
        let kind = if c.is_ascii_whitespace() {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            TokenKind::Whitespace
        } else if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            TokenKind::Whitespace
        } else if c == b'\'' || c == b'"' || c == b'`' {
            i = close_quote(bytes, i, c).ok_or(SqlError::UnterminatedLiteral { position: start })?;
            if c == b'\'' {
                TokenKind::Literal
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            TokenKind::Literal
        } else if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] >= 0x80) {
                i += 1;
            }
            classify_word(&sql[start..i])
        } else {
            let two = sql.get(i..i + 2);
            if matches!(two, Some("<=" | ">=" | "<>" | "!=" | "||" | "==")) {
                i += 2;
                TokenKind::Operator
            } else {
                i += 1;
                match c {
                    b'=' | b'<' | b'>' | b'+' | b'-' | b'/' | b'%' => TokenKind::Operator,
                    _ => TokenKind::Punctuation,
                }
            }
        };
        // Multi-byte characters outside words land here one byte at a time;
        // widen to the char boundary.
        while !sql.is_char_boundary(i) {
            i += 1;
        }
        tokens.push(SqlToken { kind, text: &sql[start..i], position: start });
    }
    Ok(tokens)
}

fn close_quote(bytes: &[u8], open: usize, q: u8) -> Option<usize> {
    let mut i = open + 1;
    while i < bytes.len() {
        if bytes[i] == q {
            if bytes.get(i + 1) == Some(&q) {
                i += 2;
                continue;
            }
            return Some(i + 1);
        }
        i += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(sql: &str) -> Vec<(TokenKind, &str)> {
        tokenize(sql).unwrap().into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn select_star() {
        assert_eq!(
            kinds("SELECT * FROM t"),
            [
                (Dml, "SELECT"),
                (Whitespace, " "),
                (Punctuation, "*"),
                (Whitespace, " "),
                (Keyword, "FROM"),
                (Whitespace, " "),
                (Identifier, "t")
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn unterminated_literal() {
        assert!(matches!(
            tokenize("WHERE a = 'x"),
            Err(SqlError::UnterminatedLiteral { position: 10 })
        ));
    }

    #[test]
    fn literals_and_where() {
        let k = kinds("select a.b from a where a.c >= 'it''s' union select 1.5e3");
        assert!(k.contains(&(Where, "where")));
        assert!(k.contains(&(Literal, "'it''s'")));
        assert!(k.contains(&(Operator, ">=")));
        assert!(k.contains(&(SetOp, "union")));
        assert!(k.contains(&(Literal, "1.5e3")));
        assert!(k.contains(&(Punctuation, ".")));
    }
}
