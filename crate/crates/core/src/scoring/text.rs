//! Text normalization shared by the lexicon, n-gram and score-file backends.
//!
//! Lowercase, replace every character that is neither alphanumeric nor
//! whitespace with a space, then split on whitespace.

pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect();
    cleaned.split_whitespace().map(|tok| tok.to_lowercase()).collect()
}

/// Canonical form of a text: its tokens joined by single spaces.
pub fn normalize(text: &str) -> String {
    tokenize(text).join(" ")
}

/// Word n-grams of the given order, joined by single spaces.
pub fn ngrams(tokens: &[String], order: usize) -> impl Iterator<Item = String> + '_ {
    let count = if order == 0 || order > tokens.len() {
        0
    } else {
        tokens.len() - order + 1
    };
    (0..count).map(move |i| tokens[i..i + order].join(" "))
}
