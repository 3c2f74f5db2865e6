//! Corpus-level BLEU.
//!
//! Tokenization: lowercase, every non-alphanumeric non-space character is a
//! token of its own, then whitespace split. No smoothing: if any order has
//! zero matches the score is 0. Orders for which the hypotheses contain no
//! n-grams at all (every hypothesis shorter than the order) are left out of
//! the geometric mean, so BLEU(h, h) = 100 for any non-empty corpus.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 4;

pub fn bleu_tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(c.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn counts<'a>(tokens: &'a [String], n: usize) -> HashMap<&'a [String], usize> {
    let mut out = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for gram in tokens.windows(n) {
            *out.entry(gram).or_insert(0) += 1;
        }
    }
    out
}

/// Sufficient statistics of a corpus BLEU computation.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuStats {
    /// Clipped matches per order (index 0 = unigrams).
    pub matches: Vec<usize>,
    /// Hypothesis n-gram totals per order.
    pub totals: Vec<usize>,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn compute<H: AsRef<str>, R: AsRef<str>>(hypotheses: &[H], references: &[R], max_order: usize) -> Result<Self> {
        if hypotheses.len() != references.len() {
            return Err(Error::invalid(format!(
                "{} hypotheses but {} references",
                hypotheses.len(),
                references.len()
            )));
        }
        if hypotheses.is_empty() {
            return Err(Error::invalid("BLEU of an empty corpus"));
        }
        if max_order == 0 {
            return Err(Error::invalid("max_order must be at least 1"));
        }
        let mut stats = BleuStats {
            matches: vec![0; max_order],
            totals: vec![0; max_order],
            hyp_len: 0,
            ref_len: 0,
        };
        for (h, r) in hypotheses.iter().zip(references) {
            let h = bleu_tokenize(h.as_ref());
            let r = bleu_tokenize(r.as_ref());
            stats.hyp_len += h.len();
            stats.ref_len += r.len();
            for n in 1..=max_order {
                let hc = counts(&h, n);
                let rc = counts(&r, n);
                stats.totals[n - 1] += h.len().saturating_sub(n - 1);
                stats.matches[n - 1] += hc
                    .iter()
                    .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)))
                    .sum::<usize>();
            }
        }
        Ok(stats)
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len == 0 {
            return 0.0;
        }
        (1.0 - self.ref_len as f64 / self.hyp_len as f64).min(0.0).exp()
    }

    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 {
            return if self.ref_len == 0 { 100.0 } else { 0.0 };
        }
        let mut log_sum = 0.0;
        let mut orders = 0usize;
        for (&m, &t) in self.matches.iter().zip(&self.totals) {
            if t == 0 {
                continue;
            }
            if m == 0 {
                return 0.0;
            }
            log_sum += (m as f64 / t as f64).ln();
            orders += 1;
        }
        let bleu = 100.0 * self.brevity_penalty() * (log_sum / orders as f64).exp();
        bleu.clamp(0.0, 100.0)
    }
}

pub fn corpus_bleu<H: AsRef<str>, R: AsRef<str>>(hypotheses: &[H], references: &[R], max_order: usize) -> Result<f64> {
    Ok(BleuStats::compute(hypotheses, references, max_order)?.score())
}
