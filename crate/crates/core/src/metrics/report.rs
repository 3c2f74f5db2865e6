//! Evaluation report: one row per (language pair, system) with BLEU and
//! rating means, plus correlation and agreement cells.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::{ReasonCode, Subset, System};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Accuracy,
    SentiDiv,
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Measure::Accuracy => "accuracy",
            Measure::SentiDiv => "senti_div",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRow {
    pub language_pair: String,
    pub system: System,
    pub bleu_tatoeba: Option<f64>,
    pub bleu_all: Option<f64>,
    pub bleu_idiomatic: Option<f64>,
    pub accuracy_all: Option<f64>,
    pub senti_div_all: Option<f64>,
    pub accuracy_idiomatic: Option<f64>,
    pub senti_div_idiomatic: Option<f64>,
    pub records_all: usize,
    pub records_idiomatic: usize,
    /// Reason codes by descending frequency (ties in canonical order).
    pub reasons: Vec<(ReasonCode, usize)>,
}

impl SystemRow {
    pub fn new(language_pair: &str, system: System) -> Self {
        SystemRow {
            language_pair: language_pair.to_string(),
            system,
            bleu_tatoeba: None,
            bleu_all: None,
            bleu_idiomatic: None,
            accuracy_all: None,
            senti_div_all: None,
            accuracy_idiomatic: None,
            senti_div_idiomatic: None,
            records_all: 0,
            records_idiomatic: 0,
            reasons: Vec::new(),
        }
    }

    pub fn top_reasons(&self, k: usize) -> Vec<ReasonCode> {
        self.reasons.iter().take(k).map(|(c, _)| *c).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub language_pair: String,
    pub subset: Subset,
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementCell {
    pub language_pair: String,
    pub subset: Subset,
    pub measure: Measure,
    pub alpha: f64,
    pub units: usize,
    pub annotators: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<SystemRow>,
    pub correlations: Vec<CorrelationCell>,
    pub agreement: Vec<AgreementCell>,
    pub warnings: Vec<String>,
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "--".to_string(), |v| format!("{v:.digits$}"))
}

fn render(rows: &[Vec<String>], out: &mut String) {
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (v, w))| {
                if i < 2 || i + 1 == row.len() {
                    format!("{v:<w$}")
                } else {
                    format!("{v:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn row(&self, language_pair: &str, system: System) -> Option<&SystemRow> {
        self.rows
            .iter()
            .find(|r| r.language_pair == language_pair && r.system == system)
    }

    pub fn correlation(&self, language_pair: &str, subset: Subset) -> Option<&CorrelationCell> {
        self.correlations
            .iter()
            .find(|c| c.language_pair == language_pair && c.subset == subset)
    }

    pub fn alpha(&self, language_pair: &str, subset: Subset, measure: Measure) -> Option<f64> {
        self.agreement
            .iter()
            .find(|c| c.language_pair == language_pair && c.subset == subset && c.measure == measure)
            .map(|c| c.alpha)
    }

    /// Aligned plain-text rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut rows = vec![[
            "System",
            "Pair",
            "BLEU-Tatoeba",
            "BLEU-all",
            "BLEU-idiomatic",
            "Accuracy-all",
            "SentiDiff-all",
            "Accuracy-idiomatic",
            "SentiDiff-idiomatic",
            "Top-3 reasons",
        ]
        .map(String::from)
        .to_vec()];
        for r in &self.rows {
            let top: Vec<&str> = r.top_reasons(3).iter().map(|c| c.as_str()).collect();
            rows.push(vec![
                r.system.to_string(),
                r.language_pair.clone(),
                cell(r.bleu_tatoeba, 2),
                cell(r.bleu_all, 2),
                cell(r.bleu_idiomatic, 2),
                cell(r.accuracy_all, 2),
                cell(r.senti_div_all, 2),
                cell(r.accuracy_idiomatic, 2),
                cell(r.senti_div_idiomatic, 2),
                if top.is_empty() { "--".into() } else { top.join(", ") },
            ]);
        }
        render(&rows, &mut out);

        if !self.correlations.is_empty() {
            out.push_str("\nPearson r (accuracy vs. senti_div)\n");
            let mut rows = vec![["Pair", "Subset", "r", "p", "n"].map(String::from).to_vec()];
            for c in &self.correlations {
                rows.push(vec![
                    c.language_pair.clone(),
                    c.subset.to_string(),
                    format!("{:.3}", c.r),
                    format!("{:.2e}", c.p),
                    c.n.to_string(),
                ]);
            }
            render(&rows, &mut out);
        }

        if !self.agreement.is_empty() {
            out.push_str("\nKrippendorff's alpha (interval)\n");
            let mut rows = vec![["Pair", "Subset", "Measure", "alpha", "units"]
                .map(String::from)
                .to_vec()];
            for a in &self.agreement {
                rows.push(vec![
                    a.language_pair.clone(),
                    a.subset.to_string(),
                    a.measure.to_string(),
                    format!("{:.3}", a.alpha),
                    a.units.to_string(),
                ]);
            }
            render(&rows, &mut out);
        }

        if !self.warnings.is_empty() {
            out.push_str("\nWarnings\n");
            for w in &self.warnings {
                let _ = writeln!(out, "- {w}");
            }
        }
        out
    }
}
