//! Desk-scale lexicon scorer.
//!
//! `P(positive) = sigmoid(k * sum(polarity of matched tokens) / max(1, matches))`
//! with `k = 2`. A heuristic stand-in for a trained classifier; texts with no
//! lexicon hits score 0.5.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::text::tokenize;
use super::{ClassDistribution, SentimentScorer};

pub const LEXICON_SLOPE: f64 = 2.0;

const BUILTIN: &[(&str, &str)] = &[
    ("en", include_str!("../../lexicons/en.tsv")),
    ("es", include_str!("../../lexicons/es.tsv")),
    ("id", include_str!("../../lexicons/id.tsv")),
];

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone)]
pub struct LexiconScorer {
    id: String,
    polarity: HashMap<String, f64>,
}

impl LexiconScorer {
    /// Built-in lexicon for `language`; only `en`, `es` and `id` ship.
    pub fn builtin(language: &str) -> Result<Self> {
        let (_, raw) = BUILTIN
            .iter()
            .find(|(lang, _)| *lang == language)
            .ok_or_else(|| Error::UnsupportedLanguage(language.to_string()))?;
        Ok(LexiconScorer {
            id: format!("lexicon:{language}"),
            polarity: parse_lexicon(raw)?,
        })
    }

    pub fn from_path(language: &str, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path)?;
        Ok(LexiconScorer {
            id: format!("lexicon:{language}@{}", path.display()),
            polarity: parse_lexicon(&raw)?,
        })
    }

    pub fn from_entries<I, S>(language: &str, entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        LexiconScorer {
            id: format!("lexicon:{language}"),
            polarity: entries
                .into_iter()
                .map(|(w, p)| (w.as_ref().to_lowercase(), p))
                .collect(),
        }
    }

    pub fn positive_probability(&self, text: &str) -> f64 {
        let (sum, hits) = tokenize(text)
            .iter()
            .filter_map(|tok| self.polarity.get(tok))
            .fold((0.0, 0usize), |(s, n), p| (s + p, n + 1));
        sigmoid(LEXICON_SLOPE * sum / hits.max(1) as f64)
    }
}

impl SentimentScorer for LexiconScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn distribution(&self, text: &str) -> Result<ClassDistribution> {
        ClassDistribution::binary(self.positive_probability(text))
    }
}

/// `word<TAB>polarity` lines; `#` starts a comment line.
fn parse_lexicon(raw: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (i, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, pol) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected `word<TAB>polarity`"))?;
        let pol: f64 = pol
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("bad polarity `{}`", pol.trim())))?;
        if !pol.is_finite() {
            return Err(Error::parse(i + 1, "polarity must be finite"));
        }
        out.insert(word.trim().to_lowercase(), pol);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::score_text;

    #[test]
    fn saturated_positive_text() {
        let s = LexiconScorer::builtin("en").unwrap();
        let score = score_text("great, wonderful!", &s).unwrap();
        // sigmoid(2 * 2 / 2) = 1 / (1 + e^-2)
        assert!((score.value - 0.880_797_077_977_882_3).abs() < 1e-15);
    }

    #[test]
    fn no_hits_is_neutral() {
        let s = LexiconScorer::builtin("en").unwrap();
        assert_eq!(s.positive_probability("the cat sat"), 0.5);
    }

    #[test]
    fn mixed_polarity_averages() {
        let s = LexiconScorer::from_entries("en", [("good", 1.0), ("bad", -1.0), ("meh", -0.5)]);
        assert_eq!(s.positive_probability("good bad"), 0.5);
        let expected = 1.0 / (1.0 + (2.0 * 0.25_f64).exp());
        assert!((s.positive_probability("good meh meh bad") - expected).abs() < 1e-15);
    }

    #[test]
    fn unknown_builtin_language() {
        assert!(matches!(
            LexiconScorer::builtin("xx"),
            Err(Error::UnsupportedLanguage(_))
        ));
    }

    #[test]
    fn lexicon_file_errors_are_located() {
        let err = parse_lexicon("# c\ngood\t1\nbad -1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse_lexicon("good\tvery\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
    }
}
