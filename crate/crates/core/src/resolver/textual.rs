use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::spell::{correct, Lexicon};
use super::ResolutionMethod;

/// Lowercases, drops apostrophes and periods, turns other punctuation into
/// spaces and collapses whitespace.
pub fn clean_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        if ch == '\'' || ch == '\u{2019}' || ch == '.' {
            continue;
        }
        if ch.is_alphanumeric() {
            out.extend(ch.to_lowercase());
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Distinct values of one column with their cleaned forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueIndex {
    pub table: String,
    pub column: String,
    pub values: Vec<String>,
    pub cleaned: Vec<String>,
    #[serde(skip)]
    tokens: Vec<String>,
    #[serde(skip)]
    lookup: HashMap<String, Vec<usize>>,
}

impl ValueIndex {
    pub fn build(table: &str, column: &str, values: impl IntoIterator<Item = String>) -> Self {
        let mut seen = BTreeSet::new();
        let values: Vec<String> = values.into_iter().filter(|v| seen.insert(v.clone())).collect();
        let cleaned: Vec<String> = values.iter().map(|v| clean_text(v)).collect();
        let mut lookup: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, c) in cleaned.iter().enumerate() {
            if !c.is_empty() {
                lookup.entry(c.clone()).or_default().push(i);
            }
        }
        let tokens: BTreeSet<String> =
            cleaned.iter().flat_map(|c| c.split(' ').map(str::to_string)).filter(|t| !t.is_empty()).collect();
        ValueIndex {
            table: table.to_string(),
            column: column.to_string(),
            values,
            cleaned,
            tokens: tokens.into_iter().collect(),
            lookup,
        }
    }

    /// Distinct tokens across all cleaned values, sorted.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A query token after spell checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectedToken {
    pub original: String,
    pub token: String,
    pub corrected: bool,
}

/// Spell-checks cleaned query tokens against the dictionary and the
/// column's value tokens. Stopwords, tokens with digits and tokens that are
/// already known words are left alone.
pub fn correct_tokens(query: &str, index: &ValueIndex, lexicon: &Lexicon) -> Vec<CorrectedToken> {
    clean_text(query)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let known = lexicon.is_stopword(t)
                || lexicon.is_word(t)
                || t.chars().any(|c| c.is_ascii_digit())
                || index.tokens.binary_search_by(|x| x.as_str().cmp(t)).is_ok();
            let fixed = if known { None } else { correct(t, &index.tokens, lexicon) };
            match fixed {
                Some(c) => CorrectedToken { original: t.to_string(), token: c.word, corrected: true },
                None => CorrectedToken { original: t.to_string(), token: t.to_string(), corrected: false },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextualOutcome {
    Resolved { value: String, method: ResolutionMethod },
    NoMatch,
    Ambiguous(Vec<String>),
}

/// Matches unigrams and bigrams of the spell-checked query against the
/// column's cleaned values. The longest matching gram wins; a tie between
/// different values is reported as ambiguous.
pub fn resolve_textual_detailed(query: &str, index: &ValueIndex, lexicon: &Lexicon) -> TextualOutcome {
    let tokens = correct_tokens(query, index, lexicon);
    // (gram length in tokens, value index, corrected)
    let mut matches: Vec<(usize, usize, bool)> = Vec::new();
    for n in 1..=2 {
        for window in tokens.windows(n) {
            if window.iter().all(|t| lexicon.is_stopword(&t.token)) {
                continue;
            }
            let gram = window.iter().map(|t| t.token.as_str()).collect::<Vec<_>>().join(" ");
            if let Some(hits) = index.lookup.get(&gram) {
                let corrected = window.iter().any(|t| t.corrected);
                for &v in hits {
                    matches.push((n, v, corrected));
                }
            }
        }
    }
    let Some(best) = matches.iter().map(|m| m.0).max() else {
        return TextualOutcome::NoMatch;
    };
    let top: Vec<&(usize, usize, bool)> = matches.iter().filter(|m| m.0 == best).collect();
    let distinct: BTreeSet<usize> = top.iter().map(|m| m.1).collect();
    if distinct.len() > 1 {
        return TextualOutcome::Ambiguous(distinct.into_iter().map(|i| index.values[i].clone()).collect());
    }
    let (n, v, _) = *top[0];
    let corrected = top.iter().all(|m| m.2);
    let method = if corrected {
        ResolutionMethod::SpellCorrected
    } else if n == 2 {
        ResolutionMethod::Bigram
    } else {
        ResolutionMethod::Exact
    };
    TextualOutcome::Resolved { value: index.values[v].clone(), method }
}

/// The column value named by the query, if exactly one is found.
pub fn resolve_textual(query: &str, index: &ValueIndex, lexicon: &Lexicon) -> Option<(String, ResolutionMethod)> {
    match resolve_textual_detailed(query, index, lexicon) {
        TextualOutcome::Resolved { value, method } => Some((value, method)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn index(values: &[&str]) -> ValueIndex {
        ValueIndex::build("t", "c", values.iter().map(|v| v.to_string()))
    }

    #[test]
    fn misspelled_name_is_corrected() {
        let lex = Lexicon::builtin();
        let idx = index(&["JOHNNY", "NICK", "ED", "PENELOPE"]);
        assert_eq!(
            resolve_textual("Name all movies starring Jhonny Cage", &idx, &lex),
            Some(("JOHNNY".into(), ResolutionMethod::SpellCorrected))
        );
    }

    #[test]
    fn exact_value() {
        let lex = Lexicon::builtin();
        let idx = index(&["MARY", "PATRICIA", "LINDA"]);
        assert_eq!(
            resolve_textual(
                "What are the email addresses of the customer whose first name is MARY?",
                &idx,
                &lex
            ),
            Some(("MARY".into(), ResolutionMethod::Exact))
        );
    }

    #[test]
    fn two_word_value_uses_bigram() {
        let lex = Lexicon::builtin();
        let idx = index(&["New York", "York", "Boston"]);
        assert_eq!(
            resolve_textual("total sales in new york last year", &idx, &lex),
            Some(("New York".into(), ResolutionMethod::Bigram))
        );
    }

    #[test]
    fn tie_between_values_is_ambiguous() {
        let lex = Lexicon::builtin();
        let idx = index(&["Paris", "London"]);
        assert_eq!(
            resolve_textual_detailed("flights from paris to london", &idx, &lex),
            TextualOutcome::Ambiguous(vec!["Paris".into(), "London".into()])
        );
        assert_eq!(resolve_textual_detailed("flights to rome", &idx, &lex), TextualOutcome::NoMatch);
    }

    #[test]
    fn cleaning() {
        assert_eq!(clean_text("  O'Brien, St. Louis!"), "obrien st louis");
        let idx = index(&["A", "B", "A"]);
        assert_eq!(idx.values, ["A", "B"]);
        assert_eq!(idx.cleaned, ["a", "b"]);
    }
}
