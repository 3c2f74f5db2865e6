//! Evaluation statistics.

pub mod alpha;
pub mod bleu;
pub mod pearson;
pub mod ratings;
pub mod report;

pub use alpha::{krippendorff_alpha_interval, AgreementMatrix};
pub use bleu::{bleu_tokenize, corpus_bleu, BleuStats, DEFAULT_MAX_ORDER};
pub use pearson::{pearson_r, two_tailed_p, Correlation, PairedSamples};
pub use ratings::{aggregate_ratings, reason_code_frequencies, RatingMeans};
pub use report::{AgreementCell, CorrelationCell, Measure, MetricsReport, SystemRow};
