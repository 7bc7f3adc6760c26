use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;

fn unit(w: &str) -> Option<u64> {
    Some(match w {
        "zero" => 0,
        "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        _ => return None,
    })
}

fn teen(w: &str) -> Option<u64> {
    Some(match w {
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        "thirteen" => 13,
        "fourteen" => 14,
        "fifteen" => 15,
        "sixteen" => 16,
        "seventeen" => 17,
        "eighteen" => 18,
        "nineteen" => 19,
        _ => return None,
    })
}

fn tens(w: &str) -> Option<u64> {
    Some(match w {
        "twenty" => 20,
        "thirty" => 30,
        "forty" => 40,
        "fifty" => 50,
        "sixty" => 60,
        "seventy" => 70,
        "eighty" => 80,
        "ninety" => 90,
        _ => return None,
    })
}

/// Parses 0..=99 starting at `words[i]`; returns value and words consumed.
fn below_hundred(words: &[String], i: usize) -> Option<(u64, usize)> {
    let w = words.get(i)?.as_str();
    if let Some(v) = teen(w) {
        return Some((v, 1));
    }
    if let Some(t) = tens(w) {
        if let Some(u) = words.get(i + 1).and_then(|n| unit(n)).filter(|u| *u > 0) {
            return Some((t + u, 2));
        }
        return Some((t, 1));
    }
    unit(w).map(|u| (u, 1))
}

/// Parses 0..=999.
fn below_thousand(words: &[String], i: usize) -> Option<(u64, usize)> {
    let (first, n) = below_hundred(words, i)?;
    if (1..=9).contains(&first) && n == 1 && words.get(i + 1).map(String::as_str) == Some("hundred") {
        let mut used = 2;
        let mut total = first * 100;
        let mut j = i + 2;
        if words.get(j).map(String::as_str) == Some("and") && below_hundred(words, j + 1).is_some() {
            j += 1;
            used += 1;
        }
        if let Some((rest, m)) = below_hundred(words, j).filter(|(v, _)| *v > 0) {
            total += rest;
            used += m;
        }
        return Some((total, used));
    }
    Some((first, n))
}

/// Parses 0..=999_999.
fn number(words: &[String], i: usize) -> Option<(u64, usize)> {
    let (head, n) = below_thousand(words, i)?;
    if head > 0 && words.get(i + n).map(String::as_str) == Some("thousand") {
        let mut total = head * 1000;
        let mut used = n + 1;
        let mut j = i + used;
        if words.get(j).map(String::as_str) == Some("and") && below_thousand(words, j + 1).is_some() {
            j += 1;
            used += 1;
        }
        if let Some((rest, m)) = below_thousand(words, j).filter(|(v, _)| *v > 0) {
            total += rest;
            used += m;
        }
        return Some((total, used));
    }
    Some((head, n))
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z]+").unwrap())
}

/// Rewrites English number words as digits: "at least two times" becomes
/// "at least 2 times", "twenty-one" becomes "21". Covers zero through
/// nine hundred ninety nine thousand nine hundred ninety nine.
pub fn words_to_digits(text: &str) -> String {
    // Words with their byte ranges; hyphens and spaces between number words
    // are both accepted as separators.
    let found: Vec<(String, Range<usize>)> = word_re()
        .find_iter(text)
        .map(|m| (m.as_str().to_ascii_lowercase(), m.range()))
        .collect();
    let words: Vec<String> = found.iter().map(|(w, _)| w.clone()).collect();
    let joined = |k: usize| {
        let gap = &text[found[k].1.end..found[k + 1].1.start];
        !gap.is_empty() && gap.chars().all(|c| c == ' ' || c == '-')
    };
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    let mut i = 0;
    while i < words.len() {
        let mut run = 1;
        while i + run < words.len() && joined(i + run - 1) {
            run += 1;
        }
        match number(&words[i..i + run], 0) {
            Some((value, n)) => {
                out.push_str(&text[cursor..found[i].1.start]);
                out.push_str(&value.to_string());
                cursor = found[i + n - 1].1.end;
                i += n;
            }
            None => i += 1,
        }
    }
    out.push_str(&text[cursor..]);
    out
}

fn numeral_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?:^|[\s(])(-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?)\b").unwrap()
    })
}

/// Numerals in textual order with their byte ranges, thousands separators
/// removed.
pub fn extract_numerals(text: &str) -> Vec<(String, Range<usize>)> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(c) = numeral_re().captures_at(text, from) {
        let m = c.get(1).unwrap();
        out.push((m.as_str().replace(',', ""), m.range()));
        from = m.end();
    }
    // Numerals glued to letters ("4th", "x2") are not values.
    out.retain(|(_, r)| !text[r.end..].starts_with(|c: char| c.is_alphabetic()));
    out
}
