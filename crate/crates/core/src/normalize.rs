//! Attribute value normalization and placeholder detection.
//!
//! Model output is matched literally downstream, so values are reduced to a
//! canonical form once, at parse time: trimmed, internal whitespace collapsed
//! to single spaces, lowercased. No stemming or synonym folding.

use std::collections::BTreeSet;

/// Canonical form of an attribute value.
///
/// Idempotent, and case-insensitively equal inputs normalize identically.
pub fn normalize_value(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Tokens that denote an absent value. Triples carrying one are dropped
/// before any graph is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceholderSet {
    tokens: BTreeSet<String>,
}

impl Default for PlaceholderSet {
    fn default() -> Self {
        PlaceholderSet::new(["", "n/a", "na", "none", "null", "unknown"])
    }
}

impl PlaceholderSet {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        PlaceholderSet {
            tokens: tokens
                .into_iter()
                .map(|t| normalize_value(t.as_ref()))
                .collect(),
        }
    }

    /// Parse a comma-separated token list, e.g. `none,n/a,missing`.
    pub fn from_comma_list(spec: &str) -> Self {
        PlaceholderSet::new(spec.split(','))
    }

    /// `value` must already be normalized.
    pub fn contains(&self, value: &str) -> bool {
        self.tokens.contains(value)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|s| s.as_str())
    }
}
