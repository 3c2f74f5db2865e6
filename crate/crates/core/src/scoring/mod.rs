//! Continuous sentiment scoring.
//!
//! Every backend produces a [`ClassDistribution`] over sentiment classes; the
//! scalar score of a text is the expected class value under that
//! distribution. With the default binary encoding (negative = 0,
//! positive = 1) the score is exactly the positive-class probability.
//!
//! Scores from two independently trained scorers (e.g. one per language) are
//! not cross-calibrated. Comparing them on the shared `[0, 1]` interval is
//! what the re-ranker does, but it is an assumption the caller accepts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod lexicon;
pub mod ngram;
pub mod remote;
pub mod score_file;
pub mod text;

pub use lexicon::LexiconScorer;
pub use ngram::{train_ngram_scorer, NgramModel, NgramScorer, TrainConfig, TrainReport};
pub use remote::RemoteScorer;
pub use score_file::ScoreFileScorer;

const SUM_TOLERANCE: f64 = 1e-9;

/// Probabilities over sentiment classes together with the numeric value of
/// each class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    probabilities: Vec<f64>,
    class_values: Vec<f64>,
    class_labels: Vec<String>,
}

impl ClassDistribution {
    pub fn new(probabilities: Vec<f64>, class_values: Vec<f64>, class_labels: Vec<String>) -> Result<Self> {
        let dist = ClassDistribution {
            probabilities,
            class_values,
            class_labels,
        };
        dist.validate()?;
        Ok(dist)
    }

    /// Two-class distribution with values negative = 0, positive = 1.
    pub fn binary(positive: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&positive) {
            return Err(Error::invalid(format!(
                "positive-class probability {positive} outside [0, 1]"
            )));
        }
        Self::new(
            vec![1.0 - positive, positive],
            vec![0.0, 1.0],
            vec!["negative".into(), "positive".into()],
        )
    }

    /// Distribution obtained by a softmax over classifier logits.
    pub fn from_logits(logits: &[f64], class_values: Vec<f64>, class_labels: Vec<String>) -> Result<Self> {
        Self::new(softmax(logits)?, class_values, class_labels)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.probabilities.len();
        if m < 2 {
            return Err(Error::invalid(format!("need at least 2 classes, got {m}")));
        }
        if self.class_values.len() != m || self.class_labels.len() != m {
            return Err(Error::invalid(format!(
                "length mismatch: {} probabilities, {} class values, {} labels",
                m,
                self.class_values.len(),
                self.class_labels.len()
            )));
        }
        if let Some(p) = self.probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {total}, expected 1")));
        }
        for (i, v) in self.class_values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid(format!("class value {v} is not finite")));
            }
            if self.class_values[..i].contains(v) {
                return Err(Error::invalid(format!("duplicate class value {v}")));
            }
        }
        Ok(())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn class_values(&self) -> &[f64] {
        &self.class_values
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.class_values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// A scalar sentiment score with the scorer that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub value: f64,
    pub scorer_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<ClassDistribution>,
}

/// Numerically stable softmax.
///
/// Elements whose logit sits more than ~745 below the maximum underflow to 0.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::invalid("softmax of an empty logit vector"));
    }
    if let Some(x) = logits.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite logit {x}")));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Expected class value `sum_n P(c_n | x) * v_n`.
pub fn expected_class_value(dist: &ClassDistribution) -> Result<f64> {
    dist.validate()?;
    let value: f64 = dist
        .probabilities
        .iter()
        .zip(&dist.class_values)
        .map(|(p, v)| p * v)
        .sum();
    let (lo, hi) = dist.value_range();
    Ok(value.clamp(lo, hi))
}

/// Wraps [`expected_class_value`] into a [`SentimentScore`] that keeps the
/// distribution it was computed from.
pub fn score_distribution(dist: ClassDistribution, scorer_id: &str) -> Result<SentimentScore> {
    let value = expected_class_value(&dist)?;
    Ok(SentimentScore {
        value,
        scorer_id: scorer_id.to_string(),
        distribution: Some(dist),
    })
}

/// A resolved scoring backend.
///
/// Implementations hold immutable state after construction and may be shared
/// across threads.
pub trait SentimentScorer: Send + Sync {
    /// Identifier recorded in every score this backend produces.
    fn id(&self) -> &str;

    /// Class distribution for one (non-empty) text.
    fn distribution(&self, text: &str) -> Result<ClassDistribution>;

    /// Class distributions for several texts, in order.
    fn distributions(&self, texts: &[&str]) -> Result<Vec<ClassDistribution>> {
        texts
            .iter()
            .enumerate()
            .map(|(index, t)| {
                self.distribution(t).map_err(|e| Error::Batch {
                    index,
                    source: Box::new(e),
                })
            })
            .collect()
    }
}

fn check_text(text: &str) -> Result<()> {
    if text.trim().is_empty() {
        return Err(Error::invalid("cannot score empty or whitespace-only text"));
    }
    Ok(())
}

/// Scores one text.
pub fn score_text(text: &str, scorer: &dyn SentimentScorer) -> Result<SentimentScore> {
    check_text(text)?;
    score_distribution(scorer.distribution(text)?, scorer.id())
}

/// Scores a batch of texts; element `i` equals `score_text(texts[i])`.
pub fn score_batch<S: AsRef<str>>(texts: &[S], scorer: &dyn SentimentScorer) -> Result<Vec<SentimentScore>> {
    let refs: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
    for (index, t) in refs.iter().enumerate() {
        check_text(t).map_err(|e| Error::Batch {
            index,
            source: Box::new(e),
        })?;
    }
    if refs.is_empty() {
        return Ok(Vec::new());
    }
    let dists = scorer.distributions(&refs)?;
    if dists.len() != refs.len() {
        return Err(Error::Protocol(format!(
            "backend returned {} distributions for {} texts",
            dists.len(),
            refs.len()
        )));
    }
    dists
        .into_iter()
        .enumerate()
        .map(|(index, d)| {
            score_distribution(d, scorer.id()).map_err(|e| Error::Batch {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Lexicon,
    NgramLogistic,
    ScoreFile,
    Remote,
}

impl Backend {
    fn required_params(self) -> &'static [&'static str] {
        match self {
            Backend::Lexicon => &[],
            Backend::NgramLogistic => &["model"],
            Backend::ScoreFile => &["path"],
            Backend::Remote => &["address"],
        }
    }

    fn allowed_params(self) -> &'static [&'static str] {
        match self {
            Backend::Lexicon => &["path"],
            Backend::NgramLogistic => &["model"],
            Backend::ScoreFile => &["path"],
            Backend::Remote => &["address", "timeout_ms"],
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Lexicon => "lexicon",
            Backend::NgramLogistic => "ngram-logistic",
            Backend::ScoreFile => "score-file",
            Backend::Remote => "remote",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lexicon" => Ok(Backend::Lexicon),
            "ngram-logistic" => Ok(Backend::NgramLogistic),
            "score-file" => Ok(Backend::ScoreFile),
            "remote" => Ok(Backend::Remote),
            other => Err(Error::invalid(format!("unknown scorer backend `{other}`"))),
        }
    }
}

/// Declarative description of a scorer.
///
/// Parameters per backend:
///
/// | backend          | required  | optional     |
/// |------------------|-----------|--------------|
/// | `lexicon`        |           | `path`       |
/// | `ngram-logistic` | `model`   |              |
/// | `score-file`     | `path`    |              |
/// | `remote`         | `address` | `timeout_ms` |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerSpec {
    pub backend: Backend,
    pub language: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
}

impl ScorerSpec {
    pub fn new(backend: Backend, language: impl Into<String>) -> Self {
        ScorerSpec {
            backend,
            language: language.into(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let lang = self.language.trim();
        if lang.is_empty() || lang.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "language tag `{}` must be a nonempty identifier",
                self.language
            )));
        }
        let mut problems = Vec::new();
        for key in self.backend.required_params() {
            if !self.parameters.contains_key(*key) {
                problems.push(format!("{} backend requires parameter `{key}`", self.backend));
            }
        }
        for key in self.parameters.keys() {
            if !self.backend.allowed_params().contains(&key.as_str()) {
                problems.push(format!("{} backend does not accept parameter `{key}`", self.backend));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Builds the backend this spec describes, loading any files it names.
    pub fn resolve(&self) -> Result<Arc<dyn SentimentScorer>> {
        self.validate()?;
        let param = |k: &str| self.parameters.get(k).map(String::as_str);
        Ok(match self.backend {
            Backend::Lexicon => match param("path") {
                Some(path) => Arc::new(LexiconScorer::from_path(&self.language, path)?),
                None => Arc::new(LexiconScorer::builtin(&self.language)?),
            },
            Backend::NgramLogistic => {
                let path = PathBuf::from(param("model").unwrap_or_default());
                Arc::new(NgramScorer::new(&self.language, NgramModel::load(&path)?))
            }
            Backend::ScoreFile => Arc::new(ScoreFileScorer::from_path(
                &self.language,
                param("path").unwrap_or_default(),
            )?),
            Backend::Remote => {
                let timeout = match param("timeout_ms") {
                    Some(ms) => Duration::from_millis(
                        ms.parse()
                            .map_err(|_| Error::invalid(format!("timeout_ms `{ms}` is not an integer")))?,
                    ),
                    None => remote::DEFAULT_TIMEOUT,
                };
                Arc::new(RemoteScorer::new(
                    param("address").unwrap_or_default(),
                    &self.language,
                    timeout,
                ))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn softmax_symmetric_pair() {
        assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_rejects_bad_input() {
        assert!(matches!(softmax(&[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(softmax(&[1.0, f64::NAN]), Err(Error::InvalidArgument(_))));
        assert!(matches!(softmax(&[f64::INFINITY, 0.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn softmax_large_logits_do_not_overflow() {
        let out = softmax(&[700.0, 699.0, -700.0]).unwrap();
        assert!(out.iter().all(|p| p.is_finite()));
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(out[0] > out[1]);
    }

    #[test]
    fn expected_value_examples() {
        let d = ClassDistribution::new(vec![0.3, 0.7], vec![0.0, 1.0], labels(2)).unwrap();
        assert_eq!(expected_class_value(&d).unwrap(), 0.7);

        let d = ClassDistribution::new(vec![1.0, 0.0], vec![0.0, 1.0], labels(2)).unwrap();
        assert_eq!(expected_class_value(&d).unwrap(), 0.0);

        let d = ClassDistribution::new(vec![0.25, 0.25, 0.5], vec![0.0, 0.5, 1.0], labels(3)).unwrap();
        assert_eq!(expected_class_value(&d).unwrap(), 0.625);
    }

    #[test]
    fn distribution_invariants_enforced() {
        assert!(ClassDistribution::new(vec![1.0], vec![0.0], labels(1)).is_err());
        assert!(ClassDistribution::new(vec![0.5, 0.5], vec![0.0], labels(2)).is_err());
        assert!(ClassDistribution::new(vec![0.6, 0.6], vec![0.0, 1.0], labels(2)).is_err());
        assert!(ClassDistribution::new(vec![-0.1, 1.1], vec![0.0, 1.0], labels(2)).is_err());
        assert!(ClassDistribution::new(vec![0.5, 0.5], vec![1.0, 1.0], labels(2)).is_err());
        assert!(ClassDistribution::new(vec![0.5, 0.5], vec![0.0, f64::NAN], labels(2)).is_err());
    }

    #[test]
    fn binary_score_is_positive_probability() {
        let d = ClassDistribution::binary(0.123456789).unwrap();
        assert_eq!(expected_class_value(&d).unwrap(), 0.123456789);
    }

    #[test]
    fn scorer_spec_validation() {
        assert!(ScorerSpec::new(Backend::Lexicon, "en").validate().is_ok());
        assert!(ScorerSpec::new(Backend::Lexicon, "").validate().is_err());
        assert!(ScorerSpec::new(Backend::Remote, "en").validate().is_err());
        assert!(ScorerSpec::new(Backend::ScoreFile, "en")
            .with_param("path", "x")
            .with_param("bogus", "1")
            .validate()
            .is_err());
        assert!(ScorerSpec::new(Backend::Remote, "en")
            .with_param("address", "http://localhost:1")
            .validate()
            .is_ok());
    }

    #[test]
    fn empty_text_rejected() {
        let scorer = LexiconScorer::builtin("en").unwrap();
        assert!(matches!(score_text("   ", &scorer), Err(Error::InvalidArgument(_))));
        let err = score_batch(&["good", " "], &scorer).unwrap_err();
        assert!(matches!(err, Error::Batch { index: 1, .. }));
    }

    #[test]
    fn empty_batch() {
        let scorer = LexiconScorer::builtin("en").unwrap();
        assert!(score_batch::<&str>(&[], &scorer).unwrap().is_empty());
    }
}
