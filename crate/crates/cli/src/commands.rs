use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use rayon::prelude::*;
use sentimt_core::eval::{
    build_report, generate_prompt_sheet, read_items_jsonl, read_records_csv, BleuInputs, TestSetBleu,
};
use sentimt_core::nbest::{parse_jsonl_nbest, parse_moses_nbest, MtBackend};
use sentimt_core::scoring::ngram::{parse_orders, parse_training_corpus};
use sentimt_core::scoring::remote::DEFAULT_TIMEOUT;
use sentimt_core::scoring::{train_ngram_scorer, TrainConfig};
use sentimt_core::{
    rerank, score_batch, Backend, Error, NBestMap, RerankConfig, RerankResult, RerankSummary, ScorerSpec, Scorers,
    SourceSegment,
};
use serde::Serialize;

use crate::config::{merge_scorer, PipelineConfig};
use crate::{Cli, Command, PromptArgs, ReportArgs, RerankArgs, ScoreArgs, TrainArgs, UsageError};

pub const SCORER_ADDRESS_ENV: &str = "SENTIMT_SCORER_ADDRESS";

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    match cli.command {
        Command::Score(args) => score(args, &cfg),
        Command::Rerank(args) => rerank_cmd(args, &cfg),
        Command::TrainScorer(args) => train(args, &cfg, seed),
        Command::MakePrompts(args) => prompts(args, &cfg, seed),
        Command::Report(args) => report(args, &cfg),
    }
}

fn required(flag: Option<PathBuf>, file: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| file.clone())
        .ok_or_else(|| UsageError(format!("{name} is required (flag or config [paths])")).into())
}

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Box::new(BufReader::new(file)))
}

fn create(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    open(path)?
        .lines()
        .collect::<io::Result<Vec<_>>>()
        .with_context(|| format!("reading {}", path.display()))
}

/// A remote scorer without an `address` flag parameter takes it from the
/// environment, ahead of the config file.
fn apply_address_env(spec: &mut ScorerSpec, flag_params: &[(String, String)]) {
    if spec.backend != Backend::Remote || flag_params.iter().any(|(k, _)| k == "address") {
        return;
    }
    if let Ok(addr) = std::env::var(SCORER_ADDRESS_ENV) {
        if !addr.trim().is_empty() {
            spec.parameters.insert("address".into(), addr);
        }
    }
}

fn score(args: ScoreArgs, cfg: &PipelineConfig) -> Result<()> {
    let mut spec = merge_scorer(
        cfg.scorer.as_ref(),
        args.scorer,
        args.language.as_deref(),
        &args.params,
        "scorer",
    )?;
    apply_address_env(&mut spec, &args.params);
    let scorer = spec.resolve()?;
    let texts = read_lines(&args.input)?;
    let scores = score_batch(&texts, scorer.as_ref()).with_context(|| format!("scoring {}", args.input.display()))?;
    let mut out = create(args.output.as_deref())?;
    for (text, s) in texts.iter().zip(scores) {
        writeln!(out, "{}\t{}", text.replace('\t', " "), s.value)?;
    }
    out.flush()?;
    Ok(())
}

fn read_sources(path: &Path, language: &str) -> Result<Vec<SourceSegment>> {
    read_lines(path)?
        .into_iter()
        .enumerate()
        .map(|(i, text)| {
            SourceSegment::new(i as u64, text, language)
                .map_err(|e| Error::parse(i + 1, e.to_string()))
                .with_context(|| format!("reading sources {}", path.display()))
        })
        .collect()
}

fn read_nbest(path: &Path, format: Option<&str>, max_len: usize) -> Result<NBestMap> {
    let jsonl = match format {
        Some(f) => f == "jsonl",
        None => path.extension().is_some_and(|e| e == "jsonl"),
    };
    let input = open(path)?;
    let ctx = || format!("reading n-best lists {}", path.display());
    if jsonl {
        return parse_jsonl_nbest(input, max_len).with_context(ctx);
    }
    let parsed = parse_moses_nbest(input, max_len).with_context(ctx)?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(parsed.lists)
}

#[derive(Serialize)]
struct ErrorBody {
    class: &'static str,
    message: String,
}

#[derive(Serialize)]
struct FallbackRecord {
    source_id: u64,
    selected_rank: usize,
    selected_text: String,
    fallback: bool,
    error: ErrorBody,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Outcome {
    Ranked(Box<RerankResult>),
    Fallback(FallbackRecord),
}

#[derive(Serialize)]
struct CorpusSummary {
    source_scorer: String,
    target_scorer: String,
    #[serde(flatten)]
    summary: RerankSummary,
    fallback_segments: usize,
}

fn fetch_candidates(
    address: &str,
    args: &RerankArgs,
    cfg: &PipelineConfig,
    config: &RerankConfig,
    sources: &[SourceSegment],
) -> Result<NBestMap> {
    let timeout = args
        .backend_timeout_ms
        .or(cfg.backend.timeout_ms)
        .map_or(DEFAULT_TIMEOUT, Duration::from_millis);
    let backend = MtBackend::new(address, &config.target_scorer.language, timeout);
    sources
        .par_iter()
        .map(|s| {
            backend
                .request_candidates(s, config.num_candidates, config.beam_size)
                .map(|l| (s.id, l))
        })
        .collect::<sentimt_core::Result<NBestMap>>()
        .with_context(|| format!("requesting candidates from {}", backend.address()))
}

fn rerank_cmd(args: RerankArgs, cfg: &PipelineConfig) -> Result<()> {
    let mut source_spec = merge_scorer(
        cfg.source_scorer.as_ref(),
        args.source_scorer,
        args.source_language.as_deref(),
        &args.source_params,
        "source scorer",
    )?;
    apply_address_env(&mut source_spec, &args.source_params);
    let mut target_spec = merge_scorer(
        cfg.target_scorer.as_ref(),
        args.target_scorer,
        args.target_language.as_deref(),
        &args.target_params,
        "target scorer",
    )?;
    apply_address_env(&mut target_spec, &args.target_params);
    let config = RerankConfig {
        num_candidates: args.num_candidates.unwrap_or(cfg.rerank.num_candidates),
        beam_size: args.beam_size.unwrap_or(cfg.rerank.beam_size),
        tie_epsilon: args.tie_epsilon.unwrap_or(cfg.rerank.tie_epsilon),
        source_scorer: source_spec,
        target_scorer: target_spec,
    };
    config.validate()?;
    let fallback = args.fallback_baseline || cfg.rerank.fallback_baseline;

    let sources_path = required(args.sources.clone(), &cfg.paths.sources, "--sources")?;
    let sources = read_sources(&sources_path, &config.source_scorer.language)?;
    let scorers = Scorers::from_config(&config)?;

    let lists = match (&args.nbest, &args.backend) {
        (Some(path), _) => read_nbest(path, args.nbest_format.as_deref(), config.num_candidates)?,
        (None, Some(addr)) => fetch_candidates(addr, &args, cfg, &config, &sources)?,
        (None, None) => match (&cfg.paths.nbest, &cfg.backend.address) {
            (Some(path), _) => read_nbest(path, args.nbest_format.as_deref(), config.num_candidates)?,
            (None, Some(addr)) => fetch_candidates(addr, &args, cfg, &config, &sources)?,
            (None, None) => return Err(UsageError("either --nbest or --backend is required".into()).into()),
        },
    };

    let missing: Vec<String> = sources
        .iter()
        .filter(|s| !lists.contains_key(&s.id))
        .map(|s| s.id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::DataMismatch(format!("no n-best list for source ids {}", missing.join(", "))).into());
    }
    if lists.len() > sources.len() {
        eprintln!(
            "warning: {} n-best lists have no source segment and were ignored",
            lists.len() - sources.len()
        );
    }

    let outcomes = sources
        .par_iter()
        .map(|s| {
            let list = &lists[&s.id];
            match rerank(s, list, &config, &scorers) {
                Ok(r) => Ok(Outcome::Ranked(Box::new(r))),
                Err(e @ Error::Scoring { .. }) if fallback => Ok(Outcome::Fallback(FallbackRecord {
                    source_id: s.id,
                    selected_rank: 0,
                    selected_text: list.best().text.clone(),
                    fallback: true,
                    error: ErrorBody {
                        class: e.class(),
                        message: e.to_string(),
                    },
                })),
                Err(e) => Err(e),
            }
        })
        .collect::<sentimt_core::Result<Vec<Outcome>>>()?;

    let output = args.output.or_else(|| cfg.paths.output.clone());
    let mut out = create(output.as_deref())?;
    for o in &outcomes {
        serde_json::to_writer(&mut out, o)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;

    let ranked: Vec<RerankResult> = outcomes
        .into_iter()
        .filter_map(|o| match o {
            Outcome::Ranked(r) => Some(*r),
            Outcome::Fallback(_) => None,
        })
        .collect();
    let summary = CorpusSummary {
        source_scorer: scorers.source.id().to_string(),
        target_scorer: scorers.target.id().to_string(),
        summary: RerankSummary::from_results(&ranked),
        fallback_segments: sources.len() - ranked.len(),
    };
    let summary_path = args.summary.or_else(|| cfg.paths.summary.clone());
    let json = serde_json::to_string_pretty(&summary)?;
    match summary_path {
        Some(p) => std::fs::write(&p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => eprintln!("{json}"),
    }
    Ok(())
}

fn train(args: TrainArgs, cfg: &PipelineConfig, seed: u64) -> Result<()> {
    let corpus_path = required(args.corpus, &cfg.paths.corpus, "--corpus")?;
    let model_path = required(args.output, &cfg.paths.model, "--output")?;
    let t = &cfg.training;
    let defaults = TrainConfig::default();
    let orders = match args.orders.as_ref().or(t.orders.as_ref()) {
        Some(spec) => parse_orders(spec)?,
        None => defaults.orders,
    };
    let train_config = TrainConfig {
        orders,
        l2: args.l2.or(t.l2).unwrap_or(defaults.l2),
        holdout: args.holdout.or(t.holdout).unwrap_or(defaults.holdout),
        max_iter: args.max_iter.or(t.max_iter).unwrap_or(defaults.max_iter),
        tolerance: args.tolerance.or(t.tolerance).unwrap_or(defaults.tolerance),
        seed,
    };
    train_config.validate()?;
    let raw = std::fs::read_to_string(&corpus_path).with_context(|| format!("reading {}", corpus_path.display()))?;
    let corpus = parse_training_corpus(&raw).with_context(|| format!("parsing {}", corpus_path.display()))?;
    let (model, report) = train_ngram_scorer(&corpus, &train_config)?;
    model
        .save(&model_path)
        .with_context(|| format!("writing {}", model_path.display()))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn prompts(args: PromptArgs, cfg: &PipelineConfig, seed: u64) -> Result<()> {
    let items_path = required(args.items, &cfg.paths.items, "--items")?;
    let sheet_path = required(args.output, &cfg.paths.sheet, "--output")?;
    let key_path = required(args.key, &cfg.paths.key, "--key")?;
    let items = read_items_jsonl(open(&items_path)?).with_context(|| format!("reading {}", items_path.display()))?;
    let sheet = generate_prompt_sheet(&items, seed)?;
    std::fs::write(&sheet_path, &sheet.document).with_context(|| format!("writing {}", sheet_path.display()))?;
    std::fs::write(&key_path, sheet.key_json()? + "\n").with_context(|| format!("writing {}", key_path.display()))?;
    eprintln!("{} prompts written (seed {seed})", sheet.prompts.len());
    Ok(())
}

fn test_set(spec: &str) -> Result<TestSetBleu> {
    let fields: Vec<&str> = spec.splitn(4, ',').map(str::trim).collect();
    let [pair, system, hyp, reference] = fields[..] else {
        return Err(UsageError(format!("--test-set expects PAIR,SYSTEM,HYP,REF, got `{spec}`")).into());
    };
    let system = system.parse().map_err(|e: Error| UsageError(e.to_string()))?;
    Ok(TestSetBleu {
        language_pair: pair.to_string(),
        system,
        hypotheses: read_lines(Path::new(hyp))?,
        references: read_lines(Path::new(reference))?,
    })
}

fn report(args: ReportArgs, cfg: &PipelineConfig) -> Result<()> {
    let records_path = required(args.records, &cfg.paths.records, "--records")?;
    let records =
        read_records_csv(open(&records_path)?).with_context(|| format!("reading {}", records_path.display()))?;
    let items = match args.items.or_else(|| cfg.paths.items.clone()) {
        Some(p) => read_items_jsonl(open(&p)?).with_context(|| format!("reading {}", p.display()))?,
        None => Vec::new(),
    };
    let inputs = BleuInputs {
        reference_system: args.reference_system,
        test_sets: args.test_sets.iter().map(|s| test_set(s)).collect::<Result<_>>()?,
    };
    let report = build_report(&records, &items, &inputs)?;
    if let Some(p) = args.json.or_else(|| cfg.paths.report_json.clone()) {
        std::fs::write(&p, report.to_json()? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", report.to_table());
    Ok(())
}
