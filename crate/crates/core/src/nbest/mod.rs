//! N-best candidate lists: types, file formats, and the MT backend client.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod backend;
pub mod jsonl;
pub mod moses;

pub use backend::{MtBackend, TranslateRequest, TranslateResponse};
pub use jsonl::{parse_jsonl_nbest, write_jsonl_nbest};
pub use moses::{parse_moses_nbest, MosesParse};

/// Candidates generated per source by default.
pub const DEFAULT_NUM_CANDIDATES: usize = 10;
/// Decoder beam width used by default.
pub const DEFAULT_BEAM_SIZE: usize = 10;

pub type NBestMap = BTreeMap<u64, NBestList>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSegment {
    pub id: u64,
    pub text: String,
    pub language: String,
}

impl SourceSegment {
    pub fn new(id: u64, text: impl Into<String>, language: impl Into<String>) -> Result<Self> {
        let seg = SourceSegment {
            id,
            text: text.into(),
            language: language.into(),
        };
        if seg.text.trim().is_empty() {
            return Err(Error::invalid(format!("source {id} has empty text")));
        }
        Ok(seg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Position in the decoder output; 0 is the model-best hypothesis.
    pub rank: usize,
    pub text: String,
    /// Total model score (log-probability), when the producer reports one.
    pub model_score: Option<f64>,
    /// Moses feature column, kept verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<String>,
}

/// Ordered candidate translations for one source segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBestList {
    pub source_id: u64,
    /// Source text, when the producing format carries it.
    pub source: Option<String>,
    candidates: Vec<Candidate>,
}

impl NBestList {
    /// Builds a list from texts in decoder order, assigning ranks 0..k-1.
    pub fn from_texts<I>(source_id: u64, source: Option<String>, entries: I, max_len: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Option<f64>)>,
    {
        let candidates = entries
            .into_iter()
            .enumerate()
            .map(|(rank, (text, model_score))| Candidate {
                rank,
                text,
                model_score,
                features: None,
            })
            .collect();
        Self::new(source_id, source, candidates, max_len)
    }

    pub fn new(source_id: u64, source: Option<String>, candidates: Vec<Candidate>, max_len: usize) -> Result<Self> {
        let list = NBestList {
            source_id,
            source,
            candidates,
        };
        let problems = list.violations(max_len);
        if problems.is_empty() {
            Ok(list)
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Hard invariant violations (monotonicity is reported separately as a
    /// warning by [`NBestList::score_warnings`]).
    pub fn violations(&self, max_len: usize) -> Vec<String> {
        let id = self.source_id;
        let mut out = Vec::new();
        let k = self.candidates.len();
        if k == 0 {
            out.push(format!("list {id} is empty"));
        }
        if k > max_len {
            out.push(format!("list {id} has {k} candidates, maximum is {max_len}"));
        }
        for (i, c) in self.candidates.iter().enumerate() {
            if c.rank != i {
                out.push(format!("list {id}: candidate at position {i} has rank {}", c.rank));
            }
            if c.text.trim().is_empty() {
                out.push(format!("list {id}: candidate {i} has empty text"));
            }
            if let Some(s) = c.model_score {
                if !s.is_finite() || s > 0.0 {
                    out.push(format!("list {id}: candidate {i} score {s} is not a log-probability"));
                }
            }
        }
        out
    }

    /// Warnings for lists whose model scores increase with rank.
    pub fn score_warnings(&self) -> Vec<String> {
        let scores: Option<Vec<f64>> = self.candidates.iter().map(|c| c.model_score).collect();
        let Some(scores) = scores else {
            return Vec::new();
        };
        scores
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] > w[0])
            .map(|(i, w)| {
                format!(
                    "list {}: score rises from rank {i} ({}) to rank {} ({})",
                    self.source_id,
                    w[0],
                    i + 1,
                    w[1]
                )
            })
            .collect()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn best(&self) -> &Candidate {
        &self.candidates[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(rank: usize, text: &str, score: Option<f64>) -> Candidate {
        Candidate {
            rank,
            text: text.into(),
            model_score: score,
            features: None,
        }
    }

    #[test]
    fn rank_gaps_rejected() {
        let err = NBestList::new(1, None, vec![cand(0, "a", None), cand(2, "b", None)], 10).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn length_limit_is_a_parameter() {
        let texts = (0..4).map(|i| (format!("t{i}"), None));
        assert!(NBestList::from_texts(0, None, texts.clone(), 3).is_err());
        assert_eq!(NBestList::from_texts(0, None, texts, 4).unwrap().len(), 4);
    }

    #[test]
    fn empty_and_positive_scores_rejected() {
        assert!(NBestList::new(0, None, vec![], 10).is_err());
        assert!(NBestList::new(0, None, vec![cand(0, "a", Some(0.5))], 10).is_err());
        assert!(NBestList::new(0, None, vec![cand(0, " ", None)], 10).is_err());
    }

    #[test]
    fn rising_scores_warn_only() {
        let list = NBestList::new(3, None, vec![cand(0, "a", Some(-2.0)), cand(1, "b", Some(-1.0))], 10).unwrap();
        assert_eq!(list.score_warnings().len(), 1);
    }

    #[test]
    fn duplicate_texts_are_kept() {
        let list = NBestList::from_texts(0, None, [("x".to_string(), None), ("x".to_string(), None)], 10).unwrap();
        assert_eq!(list.len(), 2);
    }
}
