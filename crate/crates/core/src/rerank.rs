//! Sentiment-divergence re-ranking.
//!
//! The source and every candidate are scored on the same continuous scale;
//! the candidate whose score is closest to the source score is selected.
//! Candidates within `tie_epsilon` of the minimum divergence are ties, and
//! ties go to the lowest model rank, so a list whose rank-0 candidate is
//! already optimal reproduces baseline decoding.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::nbest::{NBestList, NBestMap, SourceSegment, DEFAULT_BEAM_SIZE, DEFAULT_NUM_CANDIDATES};
use crate::scoring::{score_batch, score_text, ScorerSpec, SentimentScore, SentimentScorer};

pub const DEFAULT_TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankConfig {
    pub num_candidates: usize,
    pub beam_size: usize,
    pub tie_epsilon: f64,
    pub source_scorer: ScorerSpec,
    pub target_scorer: ScorerSpec,
}

impl RerankConfig {
    pub fn new(source_scorer: ScorerSpec, target_scorer: ScorerSpec) -> Self {
        RerankConfig {
            num_candidates: DEFAULT_NUM_CANDIDATES,
            beam_size: DEFAULT_BEAM_SIZE,
            tie_epsilon: DEFAULT_TIE_EPSILON,
            source_scorer,
            target_scorer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_candidates == 0 {
            return Err(Error::invalid("num_candidates must be at least 1"));
        }
        if self.num_candidates > self.beam_size {
            return Err(Error::invalid(format!(
                "num_candidates ({}) exceeds beam_size ({})",
                self.num_candidates, self.beam_size
            )));
        }
        if !(self.tie_epsilon.is_finite() && self.tie_epsilon >= 0.0) {
            return Err(Error::invalid("tie_epsilon must be finite and non-negative"));
        }
        self.source_scorer.validate()?;
        self.target_scorer.validate()
    }
}

/// Resolved scorers for the source and target side. They may be the same
/// scorer (multilingual model) or two language-specific ones.
#[derive(Clone)]
pub struct Scorers {
    pub source: Arc<dyn SentimentScorer>,
    pub target: Arc<dyn SentimentScorer>,
}

impl Scorers {
    pub fn new(source: Arc<dyn SentimentScorer>, target: Arc<dyn SentimentScorer>) -> Self {
        Scorers { source, target }
    }

    pub fn from_config(config: &RerankConfig) -> Result<Self> {
        Ok(Scorers {
            source: config.source_scorer.resolve()?,
            target: config.target_scorer.resolve()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateDiagnostic {
    pub rank: usize,
    pub score: f64,
    pub divergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankResult {
    pub source_id: u64,
    pub source_score: SentimentScore,
    pub target_scorer: String,
    pub selected_rank: usize,
    pub selected_text: String,
    pub selected_divergence: f64,
    pub per_candidate: Vec<CandidateDiagnostic>,
    pub tie_broken: bool,
}

impl RerankResult {
    /// Divergence the rank-0 (baseline) candidate would have had.
    pub fn baseline_divergence(&self) -> f64 {
        self.per_candidate[0].divergence
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub index: usize,
    pub divergence: f64,
    pub tie_broken: bool,
}

/// `|candidate - source|`.
pub fn sentiment_divergence(source_score: f64, candidate_score: f64) -> Result<f64> {
    if !source_score.is_finite() || !candidate_score.is_finite() {
        return Err(Error::invalid(format!(
            "non-finite score in divergence ({source_score}, {candidate_score})"
        )));
    }
    Ok((candidate_score - source_score).abs())
}

/// Index of the divergence-minimizing candidate, lowest index among ties.
pub fn select_candidate(source_score: f64, candidate_scores: &[f64], tie_epsilon: f64) -> Result<Selection> {
    if candidate_scores.is_empty() {
        return Err(Error::invalid("no candidates to select from"));
    }
    if !(tie_epsilon.is_finite() && tie_epsilon >= 0.0) {
        return Err(Error::invalid(format!("invalid tie_epsilon {tie_epsilon}")));
    }
    let divergences = candidate_scores
        .iter()
        .map(|&s| sentiment_divergence(source_score, s))
        .collect::<Result<Vec<f64>>>()?;
    let min = divergences.iter().copied().fold(f64::INFINITY, f64::min);
    let mut qualifying = divergences.iter().enumerate().filter(|(_, &d)| d <= min + tie_epsilon);
    let (index, &divergence) = qualifying.next().expect("minimum is always attained");
    Ok(Selection {
        index,
        divergence,
        tie_broken: qualifying.next().is_some(),
    })
}

/// Scores the source and all candidates, then selects.
pub fn rerank(
    source: &SourceSegment,
    nbest: &NBestList,
    config: &RerankConfig,
    scorers: &Scorers,
) -> Result<RerankResult> {
    if source.id != nbest.source_id {
        return Err(Error::DataMismatch(format!(
            "source {} paired with n-best list {}",
            source.id, nbest.source_id
        )));
    }
    let problems = nbest.violations(config.num_candidates);
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }

    let source_score = score_text(&source.text, scorers.source.as_ref()).map_err(|e| Error::Scoring {
        stage: Stage::SourceScoring,
        source: Box::new(e),
    })?;
    let texts: Vec<&str> = nbest.candidates().iter().map(|c| c.text.as_str()).collect();
    let candidate_scores: Vec<f64> = score_batch(&texts, scorers.target.as_ref())
        .map_err(|e| Error::Scoring {
            stage: Stage::CandidateScoring,
            source: Box::new(e),
        })?
        .into_iter()
        .map(|s| s.value)
        .collect();

    let selection = select_candidate(source_score.value, &candidate_scores, config.tie_epsilon)?;
    let per_candidate = nbest
        .candidates()
        .iter()
        .zip(&candidate_scores)
        .map(|(c, &score)| CandidateDiagnostic {
            rank: c.rank,
            score,
            divergence: (score - source_score.value).abs(),
        })
        .collect();
    let chosen = &nbest.candidates()[selection.index];
    Ok(RerankResult {
        source_id: source.id,
        target_scorer: scorers.target.id().to_string(),
        source_score,
        selected_rank: chosen.rank,
        selected_text: chosen.text.clone(),
        selected_divergence: selection.divergence,
        per_candidate,
        tie_broken: selection.tie_broken,
    })
}

/// Corpus-level aggregates. All fields are `None` for an empty corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RerankSummary {
    pub segments: usize,
    pub mean_selected_divergence: Option<f64>,
    pub mean_baseline_divergence: Option<f64>,
    pub tie_break_fraction: Option<f64>,
    pub changed_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Totals {
    n: usize,
    selected: f64,
    baseline: f64,
    ties: usize,
    changed: usize,
}

impl Totals {
    fn of(r: &RerankResult) -> Self {
        Totals {
            n: 1,
            selected: r.selected_divergence,
            baseline: r.baseline_divergence(),
            ties: usize::from(r.tie_broken),
            changed: usize::from(r.selected_rank != 0),
        }
    }

    fn merge(self, o: Totals) -> Totals {
        Totals {
            n: self.n + o.n,
            selected: self.selected + o.selected,
            baseline: self.baseline + o.baseline,
            ties: self.ties + o.ties,
            changed: self.changed + o.changed,
        }
    }
}

impl RerankSummary {
    pub fn from_results(results: &[RerankResult]) -> Self {
        let t = results.iter().map(Totals::of).fold(Totals::default(), Totals::merge);
        if t.n == 0 {
            return RerankSummary::default();
        }
        let n = t.n as f64;
        RerankSummary {
            segments: t.n,
            mean_selected_divergence: Some(t.selected / n),
            mean_baseline_divergence: Some(t.baseline / n),
            tie_break_fraction: Some(t.ties as f64 / n),
            changed_fraction: Some(t.changed as f64 / n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRerank {
    pub results: Vec<RerankResult>,
    pub summary: RerankSummary,
}

/// Re-ranks every source in parallel; results keep the order of `sources`.
pub fn rerank_corpus(
    sources: &[SourceSegment],
    nbest: &NBestMap,
    config: &RerankConfig,
    scorers: &Scorers,
) -> Result<CorpusRerank> {
    config.validate()?;
    let missing: Vec<String> = sources
        .iter()
        .filter(|s| !nbest.contains_key(&s.id))
        .map(|s| s.id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::DataMismatch(format!(
            "no n-best list for source ids {}",
            missing.join(", ")
        )));
    }
    let results = sources
        .par_iter()
        .map(|s| rerank(s, &nbest[&s.id], config, scorers))
        .collect::<Result<Vec<_>>>()?;
    let summary = RerankSummary::from_results(&results);
    Ok(CorpusRerank { results, summary })
}
