use super::OnboardingError;

/// Cleans a table or column name into a lowercase, underscore-separated
/// identifier.
///
/// Every maximal run of whitespace or punctuation becomes a single `_`,
/// apostrophes are dropped outright (`customer's` -> `customers`), and
/// leading or trailing separators are trimmed. Non-ASCII characters count as
/// punctuation, so the result always matches `[a-z0-9_]+`.
pub fn clean_identifier(name: &str) -> Result<String, OnboardingError> {
    let mut out = String::with_capacity(name.len());
    let mut pending_sep = false;
    for ch in name.chars() {
        if ch == '\'' || ch == '\u{2019}' {
            continue;
        }
        if ch.is_ascii_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.push(ch.to_ascii_lowercase());
        } else {
            pending_sep = true;
        }
    }
    if out.is_empty() {
        return Err(OnboardingError::EmptyIdentifier(name.to_string()));
    }
    Ok(out)
}

/// Splits a cleaned identifier into its underscore-separated tokens.
pub(crate) fn tokens(identifier: &str) -> impl Iterator<Item = &str> {
    identifier.split('_').filter(|t| !t.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn replaces_spaces_with_underscores() {
        assert_eq!(clean_identifier("toss winner").unwrap(), "toss_winner");
    }

    #[test]
    fn clean_name_is_unchanged() {
        assert_eq!(clean_identifier("quantity").unwrap(), "quantity");
    }

    #[test]
    fn punctuation_runs_collapse() {
        assert_eq!(clean_identifier("Order-Date (UTC)").unwrap(), "order_date_utc");
        assert_eq!(clean_identifier("  a__b  ").unwrap(), "a_b");
        assert_eq!(clean_identifier("Customer's Name").unwrap(), "customers_name");
    }

    #[test]
    fn no_alphanumerics_is_an_error() {
        assert!(matches!(
            clean_identifier(" -- "),
            Err(OnboardingError::EmptyIdentifier(_))
        ));
        assert!(clean_identifier("").is_err());
    }

    /// Reference pass: classify each character, then rebuild from the
    /// alphanumeric runs.
    fn reference(name: &str) -> Option<String> {
        let stripped: String = name.chars().filter(|c| *c != '\'' && *c != '\u{2019}').collect();
        let runs: Vec<String> = stripped
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|r| !r.is_empty())
            .map(|r| r.to_ascii_lowercase())
            .collect();
        (!runs.is_empty()).then(|| runs.join("_"))
    }

    proptest! {
        #[test]
        fn idempotent_and_well_formed(s in "\\PC{0,24}") {
            match clean_identifier(&s) {
                Ok(c) => {
                    prop_assert!(c.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_'));
                    prop_assert!(!c.starts_with('_') && !c.ends_with('_') && !c.contains("__"));
                    prop_assert_eq!(clean_identifier(&c).unwrap(), c.clone());
                    prop_assert_eq!(Some(c), reference(&s));
                }
                Err(_) => prop_assert_eq!(reference(&s), None),
            }
        }
    }
}
