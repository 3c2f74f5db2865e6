//! Rating means and reason-code rankings over human judgments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::eval::{EvaluationRecord, ReasonCode, Subset, System};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingMeans {
    pub accuracy: f64,
    pub senti_div: f64,
    pub count: usize,
}

/// Mean accuracy and sentiment-divergence rating per system within
/// `subset`. Annotators are pooled: every record is one observation.
/// Systems without records in the subset are absent from the map.
pub fn aggregate_ratings(records: &[EvaluationRecord], subset: Subset) -> BTreeMap<System, RatingMeans> {
    let mut sums: BTreeMap<System, (f64, f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| subset.contains(r.idiomatic)) {
        let e = sums.entry(r.system).or_default();
        e.0 += r.accuracy;
        e.1 += r.senti_div;
        e.2 += 1;
    }
    sums.into_iter()
        .map(|(sys, (acc, div, n))| {
            (
                sys,
                RatingMeans {
                    accuracy: acc / n as f64,
                    senti_div: div / n as f64,
                    count: n,
                },
            )
        })
        .collect()
}

/// Reason codes per system by descending frequency; ties follow the
/// canonical code order. Codes never cited are omitted.
pub fn reason_code_frequencies(records: &[EvaluationRecord]) -> BTreeMap<System, Vec<(ReasonCode, usize)>> {
    let mut counts: BTreeMap<System, BTreeMap<ReasonCode, usize>> = BTreeMap::new();
    for r in records {
        let per_system = counts.entry(r.system).or_default();
        for code in &r.reasons {
            *per_system.entry(*code).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(sys, per_code)| {
            let mut ranked: Vec<(ReasonCode, usize)> = per_code.into_iter().collect();
            // stable sort keeps the canonical order among equal counts
            ranked.sort_by(|a, b| b.1.cmp(&a.1));
            (sys, ranked)
        })
        .collect()
}
