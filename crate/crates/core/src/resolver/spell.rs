use std::collections::{BTreeMap, HashSet};
use std::path::Path;

const BUILTIN_WORDS: &str = include_str!("../../data/english_words.txt");
const BUILTIN_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Edit distance counting insertions, deletions, substitutions and swaps
/// of adjacent characters (optimal string alignment), or `None` once it
/// must exceed `limit`.
pub fn bounded_edit_distance(a: &str, b: &str, limit: usize) -> Option<usize> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.len().abs_diff(b.len()) > limit {
        return None;
    }
    let mut before: Vec<usize> = vec![0; b.len() + 1];
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    let mut prev_min = 0;
    for i in 0..a.len() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for j in 0..b.len() {
            let cost = usize::from(a[i] != b[j]);
            let mut d = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
            if i > 0 && j > 0 && a[i] == b[j - 1] && a[i - 1] == b[j] {
                d = d.min(before[j - 1] + 1);
            }
            cur[j + 1] = d;
            row_min = row_min.min(d);
        }
        // A swap reaches back two rows, so both must be out of range.
        if row_min > limit && prev_min > limit {
            return None;
        }
        prev_min = row_min;
        std::mem::swap(&mut before, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b.len()];
    (d <= limit).then_some(d)
}

/// Largest accepted edit distance for a token: 1 up to four characters,
/// 2 beyond.
pub fn max_distance(token: &str) -> usize {
    if token.chars().count() <= 4 {
        1
    } else {
        2
    }
}

/// English wordlist plus stopwords.
#[derive(Debug, Clone)]
pub struct Lexicon {
    words: HashSet<String>,
    by_length: BTreeMap<usize, Vec<String>>,
    stopwords: HashSet<String>,
}

fn lines(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

impl Lexicon {
    pub fn new(words: impl IntoIterator<Item = String>, stopwords: impl IntoIterator<Item = String>) -> Self {
        let words: HashSet<String> = words.into_iter().collect();
        let mut by_length: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for w in &words {
            by_length.entry(w.chars().count()).or_default().push(w.clone());
        }
        for bucket in by_length.values_mut() {
            bucket.sort();
        }
        Lexicon { words, by_length, stopwords: stopwords.into_iter().collect() }
    }

    /// The bundled wordlist and stopword list.
    pub fn builtin() -> Self {
        Self::new(lines(BUILTIN_WORDS), lines(BUILTIN_STOPWORDS))
    }

    /// Loads both lists from UTF-8 files with one token per line.
    pub fn from_files(words: &Path, stopwords: &Path) -> std::io::Result<Self> {
        let w = std::fs::read_to_string(words)?;
        let s = std::fs::read_to_string(stopwords)?;
        Ok(Self::new(lines(&w), lines(&s)))
    }

    pub fn is_word(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn is_stopword(&self, w: &str) -> bool {
        self.stopwords.contains(w)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    fn words_near_length(&self, len: usize, slack: usize) -> impl Iterator<Item = &str> {
        self.by_length
            .range(len.saturating_sub(slack)..=len + slack)
            .flat_map(|(_, v)| v.iter().map(String::as_str))
    }
}

/// A spelling correction and where its replacement came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correction {
    pub word: String,
    pub distance: usize,
    pub from_column: bool,
}

/// Finds the closest candidate to `token` among the column-value tokens and
/// the dictionary.
///
/// Ties on distance prefer column-value tokens, then the lexicographically
/// smallest word. Returns `None` when nothing is within [`max_distance`].
pub fn correct(token: &str, column_tokens: &[String], lexicon: &Lexicon) -> Option<Correction> {
    let limit = max_distance(token);
    let len = token.chars().count();
    let mut best: Option<Correction> = None;
    let better = |c: &Correction, best: &Option<Correction>| match best {
        None => true,
        Some(b) => (c.distance, !c.from_column, c.word.as_str()) < (b.distance, !b.from_column, b.word.as_str()),
    };
    let column = column_tokens.iter().map(|w| (w.as_str(), true));
    let dictionary = lexicon.words_near_length(len, limit).map(|w| (w, false));
    for (word, from_column) in column.chain(dictionary) {
        let bound = best.as_ref().map_or(limit, |b| b.distance.min(limit));
        if let Some(distance) = bounded_edit_distance(token, word, bound) {
            let c = Correction { word: word.to_string(), distance, from_column };
            if better(&c, &best) {
                best = Some(c);
            }
        }
    }
    best
}
