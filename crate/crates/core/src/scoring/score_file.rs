//! Precomputed scores keyed by normalized text.
//!
//! File format: UTF-8 TSV, `normalized_text<TAB>score`, score in `[0, 1]`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::text::normalize;
use super::{ClassDistribution, SentimentScorer};

#[derive(Debug, Clone)]
pub struct ScoreFileScorer {
    id: String,
    scores: HashMap<String, f64>,
}

impl ScoreFileScorer {
    pub fn from_path(language: &str, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path)?;
        Ok(ScoreFileScorer {
            id: format!("score-file:{language}@{}", path.display()),
            scores: parse_score_file(&raw)?,
        })
    }

    pub fn from_map(language: &str, scores: HashMap<String, f64>) -> Self {
        ScoreFileScorer {
            id: format!("score-file:{language}"),
            scores,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl SentimentScorer for ScoreFileScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn distribution(&self, text: &str) -> Result<ClassDistribution> {
        let key = normalize(text);
        let score = self.scores.get(&key).ok_or_else(|| Error::MissingScore(key.clone()))?;
        ClassDistribution::binary(*score)
    }
}

pub fn parse_score_file(raw: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (text, score) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected `normalized_text<TAB>score`"))?;
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("bad score `{}`", score.trim())))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::parse(i + 1, format!("score {score} outside [0, 1]")));
        }
        out.insert(normalize(text), score);
    }
    Ok(out)
}

/// Writes `text<TAB>score` rows, normalizing each text first.
pub fn write_score_file<W: Write>(mut out: W, rows: impl IntoIterator<Item = (String, f64)>) -> Result<()> {
    for (text, score) in rows {
        writeln!(out, "{}\t{}", normalize(&text), score)?;
    }
    Ok(())
}
