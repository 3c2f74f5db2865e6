//! `sentimt`: score, re-rank, train scorers and build evaluation material.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sentimt_core::eval::System;
use sentimt_core::Backend;

/// Bad flags, bad config keys, or missing required settings.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "sentimt", version, about = "Sentiment-aware re-ranking of MT n-best lists")]
pub struct Cli {
    /// Pipeline config file (TOML); flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for every random choice (prompt shuffling, held-out split).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score each input line; writes `text<TAB>score` lines.
    Score(ScoreArgs),
    /// Re-rank n-best lists by sentiment divergence from the source.
    Rerank(RerankArgs),
    /// Train an n-gram logistic-regression scorer.
    TrainScorer(TrainArgs),
    /// Write a blinded prompt sheet and its key.
    MakePrompts(PromptArgs),
    /// Build the evaluation report from judgment records.
    Report(ReportArgs),
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: sentimt_core::Error| e.to_string())
}

fn parse_system(s: &str) -> Result<System, String> {
    s.parse().map_err(|e: sentimt_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Text file, one segment per line; `-` reads stdin.
    #[arg(long, value_name = "FILE", default_value = "-")]
    pub input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Scorer backend: lexicon, ngram-logistic, score-file or remote.
    #[arg(long, value_name = "BACKEND", value_parser = parse_backend)]
    pub scorer: Option<Backend>,
    /// Language tag of the input.
    #[arg(long, value_name = "LANG")]
    pub language: Option<String>,
    /// Backend parameter, repeatable (e.g. `model=es.json`).
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, String)>,
}

#[derive(Debug, Args)]
pub struct RerankArgs {
    /// Source segments, one per line; line i (from 0) has segment id i.
    #[arg(long, value_name = "FILE")]
    pub sources: Option<PathBuf>,
    /// N-best file (Moses `id ||| text ||| features ||| score`, or JSONL).
    /// Takes precedence over `--backend`.
    #[arg(long, value_name = "FILE")]
    pub nbest: Option<PathBuf>,
    /// N-best format; inferred from the extension (`.jsonl` or Moses) if omitted.
    #[arg(long, value_name = "FORMAT", value_parser = ["moses", "jsonl"])]
    pub nbest_format: Option<String>,
    /// MT backend address to request candidates from instead of `--nbest`.
    #[arg(long, value_name = "URL", env = "SENTIMT_MT_BACKEND")]
    pub backend: Option<String>,
    /// Per-request MT backend timeout in milliseconds.
    #[arg(long, value_name = "MS")]
    pub backend_timeout_ms: Option<u64>,
    /// Candidates considered per segment (default 10).
    #[arg(long, value_name = "N")]
    pub num_candidates: Option<usize>,
    /// Beam size requested from the MT backend (default 10).
    #[arg(long, value_name = "N")]
    pub beam_size: Option<usize>,
    /// Divergences within this of the minimum tie; the lowest rank wins (default 1e-12).
    #[arg(long, value_name = "EPS")]
    pub tie_epsilon: Option<f64>,
    /// Source-side scorer backend (default lexicon).
    #[arg(long, value_name = "BACKEND", value_parser = parse_backend)]
    pub source_scorer: Option<Backend>,
    /// Source language tag.
    #[arg(long, value_name = "LANG")]
    pub source_language: Option<String>,
    /// Source scorer parameter, repeatable.
    #[arg(long = "source-param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub source_params: Vec<(String, String)>,
    /// Target-side scorer backend (default lexicon).
    #[arg(long, value_name = "BACKEND", value_parser = parse_backend)]
    pub target_scorer: Option<Backend>,
    /// Target language tag; also sent to the MT backend.
    #[arg(long, value_name = "LANG")]
    pub target_language: Option<String>,
    /// Target scorer parameter, repeatable.
    #[arg(long = "target-param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub target_params: Vec<(String, String)>,
    /// On a scoring failure, emit the rank-0 candidate marked `"fallback": true`
    /// instead of aborting.
    #[arg(long)]
    pub fallback_baseline: bool,
    /// Result JSONL; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Corpus summary JSON; stderr when omitted.
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training corpus, `label<TAB>text` per line (label: positive/negative).
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Where to write the model artifact (JSON).
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// N-gram orders, as a range `1-2` or a list `1,3`.
    #[arg(long, value_name = "ORDERS")]
    pub orders: Option<String>,
    /// L2 regularization strength (default 1.0).
    #[arg(long, value_name = "STRENGTH")]
    pub l2: Option<f64>,
    /// Held-out fraction per label, in [0, 1).
    #[arg(long, value_name = "FRACTION")]
    pub holdout: Option<f64>,
    /// L-BFGS iteration limit (default 500).
    #[arg(long, value_name = "N")]
    pub max_iter: Option<usize>,
    /// Gradient infinity-norm stopping threshold (default 1e-6).
    #[arg(long, value_name = "TOL")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    /// Evaluation items, one JSON object per line.
    #[arg(long, value_name = "FILE")]
    pub items: Option<PathBuf>,
    /// Markdown prompt sheet.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Key mapping prompt number to system (JSON).
    #[arg(long, value_name = "FILE")]
    pub key: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Judgment records CSV.
    #[arg(long, value_name = "FILE")]
    pub records: Option<PathBuf>,
    /// Evaluation items JSONL, for consistency checks and item BLEU.
    #[arg(long, value_name = "FILE")]
    pub items: Option<PathBuf>,
    /// System whose item translations serve as BLEU references.
    #[arg(long, value_name = "SYSTEM", value_parser = parse_system)]
    pub reference_system: Option<System>,
    /// General-domain BLEU input `PAIR,SYSTEM,HYP_FILE,REF_FILE`, repeatable.
    #[arg(long = "test-set", value_name = "PAIR,SYSTEM,HYP,REF")]
    pub test_sets: Vec<String>,
    /// Report JSON file; the table always goes to stdout.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

fn error_class(err: &anyhow::Error) -> (&'static str, u8) {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return ("usage-error", 2);
        }
        if let Some(e) = cause.downcast_ref::<sentimt_core::Error>() {
            return (e.class(), 1);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return ("io-error", 1);
        }
    }
    ("error", 1)
}

fn report_error(class: &str, message: &str) {
    let body = serde_json::json!({ "error": { "class": class, "message": message } });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage-error", e.render().to_string().trim());
            return ExitCode::from(2);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (class, code) = error_class(&err);
            report_error(class, &format!("{err:#}"));
            ExitCode::from(code)
        }
    }
}
