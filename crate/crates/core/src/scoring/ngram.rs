//! Word n-gram logistic-regression scorer and its trainer.
//!
//! Features are raw n-gram counts over normalized tokens. Training minimizes
//! `sum_i logloss(y_i, w.phi_i + b) + (l2 / 2) * |w|^2` (bias unregularized)
//! with L-BFGS from a zero start, so results depend only on the data and the
//! seed used for the held-out split.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lexicon::sigmoid;
use super::text::{ngrams, tokenize};
use super::{ClassDistribution, SentimentScorer};

pub const ARTIFACT_FORMAT: &str = "sentimt-ngram-logistic";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    fn target(self) -> f64 {
        match self {
            Label::Negative => 0.0,
            Label::Positive => 1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "negative" | "neg" | "0" => Ok(Label::Negative),
            "positive" | "pos" | "1" => Ok(Label::Positive),
            other => Err(Error::invalid(format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub lowercase: bool,
    pub strip_punctuation: bool,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization {
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

/// Trained model, serialized as a versioned JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramModel {
    pub format: String,
    pub version: u32,
    pub orders: Vec<usize>,
    pub normalization: Normalization,
    pub vocabulary: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl NgramModel {
    pub fn new(orders: Vec<usize>, vocabulary: Vec<String>, weights: Vec<f64>, bias: f64) -> Result<Self> {
        let mut model = NgramModel {
            format: ARTIFACT_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            orders,
            normalization: Normalization::default(),
            vocabulary,
            weights,
            bias,
            index: HashMap::new(),
        };
        model.finish()?;
        Ok(model)
    }

    fn finish(&mut self) -> Result<()> {
        if self.format != ARTIFACT_FORMAT {
            return Err(Error::invalid(format!("unknown model format `{}`", self.format)));
        }
        if self.version != ARTIFACT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model version {} (expected {ARTIFACT_VERSION})",
                self.version
            )));
        }
        if self.normalization != Normalization::default() {
            return Err(Error::invalid(
                "only lowercase + punctuation-stripped models are supported",
            ));
        }
        validate_orders(&self.orders)?;
        if self.vocabulary.len() != self.weights.len() {
            return Err(Error::invalid(format!(
                "{} vocabulary entries but {} weights",
                self.vocabulary.len(),
                self.weights.len()
            )));
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        self.index = self
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        if self.index.len() != self.vocabulary.len() {
            return Err(Error::invalid("duplicate vocabulary entries"));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        let mut model: NgramModel = serde_json::from_str(raw)?;
        model.finish()?;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Sparse count features restricted to the model vocabulary.
    fn features(&self, text: &str) -> Vec<(usize, f64)> {
        featurize(text, &self.orders, |g| self.index.get(g).copied())
    }

    pub fn logit(&self, text: &str) -> f64 {
        self.features(text)
            .iter()
            .map(|&(i, c)| self.weights[i] * c)
            .sum::<f64>()
            + self.bias
    }

    pub fn positive_probability(&self, text: &str) -> f64 {
        sigmoid(self.logit(text))
    }
}

fn featurize(text: &str, orders: &[usize], mut lookup: impl FnMut(&str) -> Option<usize>) -> Vec<(usize, f64)> {
    let tokens = tokenize(text);
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for &order in orders {
        for gram in ngrams(&tokens, order) {
            if let Some(i) = lookup(&gram) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
    }
    counts.into_iter().collect()
}

fn validate_orders(orders: &[usize]) -> Result<()> {
    if orders.is_empty() || orders.contains(&0) {
        return Err(Error::invalid(
            "n-gram orders must be a nonempty list of positive integers",
        ));
    }
    Ok(())
}

pub struct NgramScorer {
    id: String,
    model: NgramModel,
}

impl NgramScorer {
    pub fn new(language: &str, model: NgramModel) -> Self {
        NgramScorer {
            id: format!("ngram-logistic:{language}"),
            model,
        }
    }

    pub fn model(&self) -> &NgramModel {
        &self.model
    }
}

impl SentimentScorer for NgramScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn distribution(&self, text: &str) -> Result<ClassDistribution> {
        ClassDistribution::binary(self.model.positive_probability(text))
    }
}

/// Training options. Keys accepted by [`TrainConfig::from_map`]:
///
/// - `orders`: `1-2` (range) or `1,3` (list); default `1-2`
/// - `l2`: L2 strength, default `1.0`
/// - `holdout`: held-out fraction per label in `[0, 1)`, default `0.2`
/// - `max_iter`: default `500`
/// - `tolerance`: gradient infinity-norm stopping threshold, default `1e-6`
/// - `seed`: held-out split seed, default `0`
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub orders: Vec<usize>,
    pub l2: f64,
    pub holdout: f64,
    pub max_iter: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            orders: vec![1, 2],
            l2: 1.0,
            holdout: 0.2,
            max_iter: 500,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("config `{key}`: cannot parse `{value}`")))
}

pub fn parse_orders(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    let orders: Vec<usize> = if let Some((lo, hi)) = spec.split_once('-') {
        let lo: usize = parse_num("orders", lo)?;
        let hi: usize = parse_num("orders", hi)?;
        if lo > hi {
            return Err(Error::invalid(format!("empty order range `{spec}`")));
        }
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|o| parse_num("orders", o))
            .collect::<Result<BTreeSet<usize>>>()?
            .into_iter()
            .collect()
    };
    validate_orders(&orders)?;
    Ok(orders)
}

impl TrainConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (key, value) in map {
            match key.as_str() {
                "orders" => cfg.orders = parse_orders(value)?,
                "l2" => cfg.l2 = parse_num(key, value)?,
                "holdout" => cfg.holdout = parse_num(key, value)?,
                "max_iter" => cfg.max_iter = parse_num(key, value)?,
                "tolerance" => cfg.tolerance = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                other => return Err(Error::invalid(format!("unknown training option `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_orders(&self.orders)?;
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::invalid("l2 must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.holdout) {
            return Err(Error::invalid("holdout must lie in [0, 1)"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub train_size: usize,
    pub held_out_size: usize,
    pub training_accuracy: f64,
    pub held_out_accuracy: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Problem<'a> {
    docs: &'a [Vec<(usize, f64)>],
    targets: &'a [f64],
    l2: f64,
    dim: usize,
}

impl Problem<'_> {
    /// Objective and gradient; the last coordinate of `x` is the bias.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let bias = x[self.dim];
        let mut grad = vec![0.0; self.dim + 1];
        let mut loss = 0.0;
        for (doc, &y) in self.docs.iter().zip(self.targets) {
            let z: f64 = doc.iter().map(|&(i, c)| x[i] * c).sum::<f64>() + bias;
            // log(1 + e^z) - y z
            let softplus = if z > 0.0 {
                z + (-z).exp().ln_1p()
            } else {
                z.exp().ln_1p()
            };
            loss += softplus - y * z;
            let r = sigmoid(z) - y;
            for &(i, c) in doc {
                grad[i] += r * c;
            }
            grad[self.dim] += r;
        }
        for i in 0..self.dim {
            loss += 0.5 * self.l2 * x[i] * x[i];
            grad[i] += self.l2 * x[i];
        }
        (loss, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS with Armijo backtracking. Returns (solution, iterations, converged).
fn minimize(problem: &Problem<'_>, max_iter: usize, tolerance: f64) -> (Vec<f64>, usize, bool) {
    const HISTORY: usize = 10;
    let n = problem.dim + 1;
    let mut x = vec![0.0; n];
    let (mut f, mut g) = problem.eval(&x);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    for iter in 0..max_iter {
        let gnorm = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if gnorm < tolerance {
            return (x, iter, true);
        }

        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }

        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }

        let mut step = if history.is_empty() { 1.0 / gnorm.max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = problem.eval(&trial);
            if ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            return (x, iter, false);
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let stalled = (f - f_new).abs() <= f64::EPSILON * f.abs().max(1.0);
        x = x_new;
        f = f_new;
        g = g_new;
        if stalled {
            let gnorm = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            return (x, iter + 1, gnorm < tolerance);
        }
    }
    (x, max_iter, false)
}

/// Splits indices into (train, held-out), stratified by label.
fn split(corpus: &[(String, Label)], holdout: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut held = Vec::new();
    for label in [Label::Negative, Label::Positive] {
        let mut idx: Vec<usize> = (0..corpus.len()).filter(|&i| corpus[i].1 == label).collect();
        idx.shuffle(&mut rng);
        let k = ((idx.len() as f64) * holdout).round() as usize;
        let k = k.min(idx.len().saturating_sub(1));
        held.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    held.sort_unstable();
    (train, held)
}

fn accuracy(model: &NgramModel, corpus: &[(String, Label)], idx: &[usize]) -> Option<f64> {
    if idx.is_empty() {
        return None;
    }
    let correct = idx
        .iter()
        .filter(|&&i| {
            let predicted = if model.positive_probability(&corpus[i].0) >= 0.5 {
                Label::Positive
            } else {
                Label::Negative
            };
            predicted == corpus[i].1
        })
        .count();
    Some(correct as f64 / idx.len() as f64)
}

/// Trains a binary n-gram logistic scorer.
pub fn train_ngram_scorer(corpus: &[(String, Label)], config: &TrainConfig) -> Result<(NgramModel, TrainReport)> {
    config.validate()?;
    let labels: BTreeSet<Label> = corpus.iter().map(|(_, l)| *l).collect();
    if labels.len() < 2 {
        return Err(Error::invalid("training corpus must contain both labels"));
    }
    if let Some((i, _)) = corpus.iter().enumerate().find(|(_, (t, _))| t.trim().is_empty()) {
        return Err(Error::invalid(format!("training example {i} has empty text")));
    }

    let (train_idx, held_idx) = split(corpus, config.holdout, config.seed);

    let mut vocab: BTreeSet<String> = BTreeSet::new();
    for &i in &train_idx {
        let tokens = tokenize(&corpus[i].0);
        for &order in &config.orders {
            vocab.extend(ngrams(&tokens, order));
        }
    }
    let vocabulary: Vec<String> = vocab.into_iter().collect();
    let index: HashMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();

    let docs: Vec<Vec<(usize, f64)>> = train_idx
        .iter()
        .map(|&i| featurize(&corpus[i].0, &config.orders, |g| index.get(g).copied()))
        .collect();
    let targets: Vec<f64> = train_idx.iter().map(|&i| corpus[i].1.target()).collect();

    let problem = Problem {
        docs: &docs,
        targets: &targets,
        l2: config.l2,
        dim: vocabulary.len(),
    };
    let (mut x, iterations, converged) = minimize(&problem, config.max_iter, config.tolerance);
    if !converged {
        log::warn!("n-gram trainer stopped after {iterations} iterations without converging");
    }
    let bias = x.pop().unwrap_or_default();
    let model = NgramModel::new(config.orders.clone(), vocabulary, x, bias)?;

    let report = TrainReport {
        train_size: train_idx.len(),
        held_out_size: held_idx.len(),
        training_accuracy: accuracy(&model, corpus, &train_idx).unwrap_or(0.0),
        held_out_accuracy: accuracy(&model, corpus, &held_idx),
        iterations,
        converged,
    };
    Ok((model, report))
}

/// Reads a `label<TAB>text` training corpus.
pub fn parse_training_corpus(raw: &str) -> Result<Vec<(String, Label)>> {
    let mut out = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected `label<TAB>text`"))?;
        let label: Label = label.parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
        if text.trim().is_empty() {
            return Err(Error::parse(i + 1, "empty text"));
        }
        out.push((text.to_string(), label));
    }
    Ok(out)
}
