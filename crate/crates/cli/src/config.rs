//! Pipeline configuration file (TOML).
//!
//! ```toml
//! seed = 0
//!
//! [rerank]
//! num_candidates = 10
//! beam_size = 10
//! tie_epsilon = 1e-12
//! fallback_baseline = false
//!
//! [source_scorer]
//! backend = "lexicon"
//! language = "en"
//!
//! [target_scorer]
//! backend = "ngram-logistic"
//! language = "es"
//! parameters = { model = "models/es.json" }
//!
//! [backend]
//! address = "http://127.0.0.1:8080"
//! timeout_ms = 30000
//!
//! [training]
//! orders = "1-2"
//! l2 = 1.0
//! holdout = 0.2
//! max_iter = 500
//! tolerance = 1e-6
//!
//! [paths]
//! sources = "data/sources.txt"
//! nbest = "data/nbest.txt"
//! output = "out/rerank.jsonl"
//! ```
//!
//! Every key is optional and unknown keys are rejected. Command-line flags
//! override file values, which override built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sentimt_core::nbest::{DEFAULT_BEAM_SIZE, DEFAULT_NUM_CANDIDATES};
use sentimt_core::rerank::DEFAULT_TIE_EPSILON;
use sentimt_core::Backend;
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub rerank: RerankSection,
    pub source_scorer: Option<ScorerSection>,
    pub target_scorer: Option<ScorerSection>,
    /// Scorer used by `score`.
    pub scorer: Option<ScorerSection>,
    #[serde(default)]
    pub backend: BackendSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub paths: PathsSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RerankSection {
    #[serde(default = "default_num_candidates")]
    pub num_candidates: usize,
    #[serde(default = "default_beam_size")]
    pub beam_size: usize,
    #[serde(default = "default_tie_epsilon")]
    pub tie_epsilon: f64,
    #[serde(default)]
    pub fallback_baseline: bool,
}

fn default_num_candidates() -> usize {
    DEFAULT_NUM_CANDIDATES
}

fn default_beam_size() -> usize {
    DEFAULT_BEAM_SIZE
}

fn default_tie_epsilon() -> f64 {
    DEFAULT_TIE_EPSILON
}

impl Default for RerankSection {
    fn default() -> Self {
        RerankSection {
            num_candidates: DEFAULT_NUM_CANDIDATES,
            beam_size: DEFAULT_BEAM_SIZE,
            tie_epsilon: DEFAULT_TIE_EPSILON,
            fallback_baseline: false,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerSection {
    pub backend: Option<Backend>,
    pub language: Option<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    pub address: Option<String>,
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub orders: Option<String>,
    pub l2: Option<f64>,
    pub holdout: Option<f64>,
    pub max_iter: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub sources: Option<PathBuf>,
    pub nbest: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub items: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub sheet: Option<PathBuf>,
    pub key: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| anyhow::Error::new(e).context(format!("reading config {}", path.display())))?;
        Self::parse(&raw).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }

    pub fn parse(raw: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(raw)
    }
}

/// Resolves a scorer's backend, language and parameters from flags layered
/// over a config section. Parameters from the file are kept only when the
/// backend is unchanged; flag parameters override them key by key.
pub fn merge_scorer(
    section: Option<&ScorerSection>,
    backend: Option<Backend>,
    language: Option<&str>,
    params: &[(String, String)],
    what: &str,
) -> Result<sentimt_core::ScorerSpec, UsageError> {
    let file = section.cloned().unwrap_or_default();
    let file_backend = file.backend.unwrap_or(Backend::Lexicon);
    let backend = backend.unwrap_or(file_backend);
    let language = language
        .map(str::to_string)
        .or(file.language)
        .ok_or_else(|| UsageError(format!("{what} language is not set (flag or config)")))?;
    let mut spec = sentimt_core::ScorerSpec::new(backend, language);
    if backend == file_backend {
        spec.parameters = file.parameters;
    }
    for (k, v) in params {
        spec.parameters.insert(k.clone(), v.clone());
    }
    Ok(spec)
}
