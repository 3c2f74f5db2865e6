//! Assembles a [`MetricsReport`] from validated judgments.
//!
//! Per language pair and subset:
//! - rating means per system, annotators pooled;
//! - Pearson r between accuracy and senti_div over all records, pooled;
//! - Krippendorff's interval alpha per measure, with one unit per
//!   (item, system) and annotators as observers.
//!
//! Statistics that cannot be computed (one annotator, zero variance, too
//! few pairs) are left out and explained in `warnings`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::metrics::{
    aggregate_ratings, corpus_bleu, krippendorff_alpha_interval, pearson_r, reason_code_frequencies, AgreementCell,
    AgreementMatrix, CorrelationCell, Measure, MetricsReport, PairedSamples, SystemRow, DEFAULT_MAX_ORDER,
};

use super::records::{record_violations, validate_items, EvaluationItem, EvaluationRecord, Subset, System};

/// Line-aligned hypotheses and references for a BLEU column on a
/// general-domain test set.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSetBleu {
    pub language_pair: String,
    pub system: System,
    pub hypotheses: Vec<String>,
    pub references: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BleuInputs {
    /// System whose translations in the items file serve as the single
    /// reference for the BLEU-all / BLEU-idiomatic columns.
    pub reference_system: Option<System>,
    pub test_sets: Vec<TestSetBleu>,
}

pub fn build_report(
    records: &[EvaluationRecord],
    items: &[EvaluationItem],
    bleu: &BleuInputs,
) -> Result<MetricsReport> {
    let problems: Vec<String> = records
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            record_violations(r)
                .into_iter()
                .map(move |p| format!("record {}: {p}", i + 1))
        })
        .collect();
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    validate_items(items)?;
    check_consistency(records, items)?;

    let mut report = MetricsReport::default();
    let mut by_pair: BTreeMap<&str, Vec<EvaluationRecord>> = BTreeMap::new();
    for r in records {
        by_pair.entry(r.language_pair.as_str()).or_default().push(r.clone());
    }

    let mut rows: BTreeMap<(String, System), SystemRow> = BTreeMap::new();
    for (&pair, recs) in &by_pair {
        let all = aggregate_ratings(recs, Subset::All);
        let idiom = aggregate_ratings(recs, Subset::Idiomatic);
        let reasons = reason_code_frequencies(recs);
        for (sys, means) in &all {
            let row = rows
                .entry((pair.to_string(), *sys))
                .or_insert_with(|| SystemRow::new(pair, *sys));
            row.accuracy_all = Some(means.accuracy);
            row.senti_div_all = Some(means.senti_div);
            row.records_all = means.count;
            if let Some(m) = idiom.get(sys) {
                row.accuracy_idiomatic = Some(m.accuracy);
                row.senti_div_idiomatic = Some(m.senti_div);
                row.records_idiomatic = m.count;
            }
            row.reasons = reasons.get(sys).cloned().unwrap_or_default();
        }

        for subset in [Subset::All, Subset::Idiomatic] {
            let subset_recs: Vec<&EvaluationRecord> = recs.iter().filter(|r| subset.contains(r.idiomatic)).collect();
            if subset_recs.is_empty() {
                continue;
            }
            correlation(pair, subset, &subset_recs, &mut report);
            for measure in [Measure::Accuracy, Measure::SentiDiv] {
                agreement(pair, subset, measure, &subset_recs, &mut report)?;
            }
        }

        if let Some(reference) = bleu.reference_system {
            item_bleu(pair, reference, recs, items, &mut rows, &mut report.warnings)?;
        }
    }

    for set in &bleu.test_sets {
        let score = corpus_bleu(&set.hypotheses, &set.references, DEFAULT_MAX_ORDER)?;
        rows.entry((set.language_pair.clone(), set.system))
            .or_insert_with(|| SystemRow::new(&set.language_pair, set.system))
            .bleu_tatoeba = Some(score);
    }

    report.rows = rows.into_values().collect();
    Ok(report)
}

fn check_consistency(records: &[EvaluationRecord], items: &[EvaluationItem]) -> Result<()> {
    let mut problems = Vec::new();
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert((&r.language_pair, r.item_id, r.system, &r.annotator_id)) {
            problems.push(format!(
                "annotator {} rated {} item {} ({}) more than once",
                r.annotator_id, r.system, r.item_id, r.language_pair
            ));
        }
    }
    if !items.is_empty() {
        let by_id: BTreeMap<u64, &EvaluationItem> = items.iter().map(|i| (i.item_id, i)).collect();
        for r in records {
            match by_id.get(&r.item_id) {
                None => problems.push(format!("record refers to unknown item {}", r.item_id)),
                Some(item) => {
                    if item.idiomatic != r.idiomatic {
                        problems.push(format!("item {} idiomatic flag disagrees with a record", r.item_id));
                    }
                    if !item.translations.contains_key(&r.system) {
                        problems.push(format!("item {} has no {} translation", r.item_id, r.system));
                    }
                }
            }
        }
    }
    problems.dedup();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::DataMismatch(problems.join("; ")))
    }
}

fn correlation(pair: &str, subset: Subset, recs: &[&EvaluationRecord], report: &mut MetricsReport) {
    let samples = match PairedSamples::from_pairs(recs.iter().map(|r| (r.accuracy, r.senti_div))) {
        Ok(s) => s,
        Err(e) => {
            report.warnings.push(format!("{pair}/{subset}: Pearson r omitted: {e}"));
            return;
        }
    };
    match pearson_r(&samples) {
        Ok(c) => report.correlations.push(CorrelationCell {
            language_pair: pair.to_string(),
            subset,
            r: c.r,
            p: c.p,
            n: c.n,
        }),
        Err(e) => report.warnings.push(format!("{pair}/{subset}: Pearson r omitted: {e}")),
    }
}

fn agreement(
    pair: &str,
    subset: Subset,
    measure: Measure,
    recs: &[&EvaluationRecord],
    report: &mut MetricsReport,
) -> Result<()> {
    let annotators: Vec<&str> = recs
        .iter()
        .map(|r| r.annotator_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if annotators.len() < 2 {
        report.warnings.push(format!(
            "{pair}/{subset}: alpha ({measure}) omitted: fewer than 2 annotators"
        ));
        return Ok(());
    }
    let column: BTreeMap<&str, usize> = annotators.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let mut units: BTreeMap<(u64, System), Vec<Option<f64>>> = BTreeMap::new();
    for r in recs {
        let value = match measure {
            Measure::Accuracy => r.accuracy,
            Measure::SentiDiv => r.senti_div,
        };
        units
            .entry((r.item_id, r.system))
            .or_insert_with(|| vec![None; annotators.len()])[column[r.annotator_id.as_str()]] = Some(value);
    }
    let unit_count = units.len();
    let alpha = AgreementMatrix::new(units.into_values().collect()).and_then(|m| krippendorff_alpha_interval(&m));
    match alpha {
        Ok(alpha) => report.agreement.push(AgreementCell {
            language_pair: pair.to_string(),
            subset,
            measure,
            alpha,
            units: unit_count,
            annotators: annotators.len(),
        }),
        Err(e) => report
            .warnings
            .push(format!("{pair}/{subset}: alpha ({measure}) omitted: {e}")),
    }
    Ok(())
}

fn item_bleu(
    pair: &str,
    reference: System,
    recs: &[EvaluationRecord],
    items: &[EvaluationItem],
    rows: &mut BTreeMap<(String, System), SystemRow>,
    warnings: &mut Vec<String>,
) -> Result<()> {
    let ids: BTreeSet<u64> = recs.iter().map(|r| r.item_id).collect();
    let pair_items: Vec<&EvaluationItem> = items.iter().filter(|i| ids.contains(&i.item_id)).collect();
    if pair_items.is_empty() {
        return Ok(());
    }
    let systems: BTreeSet<System> = pair_items.iter().flat_map(|i| i.translations.keys().copied()).collect();
    for sys in systems {
        for subset in [Subset::All, Subset::Idiomatic] {
            let mut hyps = Vec::new();
            let mut refs = Vec::new();
            for item in pair_items.iter().filter(|i| subset.contains(i.idiomatic)) {
                if let (Some(h), Some(r)) = (item.translations.get(&sys), item.translations.get(&reference)) {
                    hyps.push(h.as_str());
                    refs.push(r.as_str());
                }
            }
            if hyps.is_empty() {
                if subset == Subset::All {
                    warnings.push(format!("{pair}: no {reference} references for BLEU of {sys}"));
                }
                continue;
            }
            let score = corpus_bleu(&hyps, &refs, DEFAULT_MAX_ORDER)?;
            let row = rows
                .entry((pair.to_string(), sys))
                .or_insert_with(|| SystemRow::new(pair, sys));
            match subset {
                Subset::All => row.bleu_all = Some(score),
                Subset::Idiomatic => row.bleu_idiomatic = Some(score),
            }
        }
    }
    Ok(())
}
