//! Sentiment-aware re-ranking of machine-translation n-best lists.
//!
//! A source sentence and each of its candidate translations are scored for
//! sentiment on a continuous scale, and the candidate whose score diverges
//! least from the source is selected. The crate also carries the evaluation
//! tooling used to judge such a system: corpus BLEU, Pearson correlation,
//! Krippendorff's alpha, and a human-evaluation harness.

pub mod error;
pub mod eval;
mod http;
pub mod metrics;
pub mod nbest;
pub mod rerank;
pub mod scoring;

pub use error::{Error, Result, Stage};
pub use nbest::{Candidate, NBestList, NBestMap, SourceSegment};
pub use rerank::{
    rerank, rerank_corpus, select_candidate, sentiment_divergence, CorpusRerank, RerankConfig, RerankResult,
    RerankSummary, Scorers, Selection,
};
pub use scoring::{
    expected_class_value, score_batch, score_text, softmax, Backend, ClassDistribution, ScorerSpec, SentimentScore,
    SentimentScorer,
};
