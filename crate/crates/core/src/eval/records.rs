//! Human judgments and the items they refer to.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ACCURACY_MAX: f64 = 5.0;
pub const SENTI_DIV_MAX: f64 = 2.0;
pub const RATING_STEP: f64 = 0.5;

pub const RECORD_HEADER: [&str; 9] = [
    "item_id",
    "system",
    "annotator_id",
    "accuracy",
    "senti_div",
    "reasons",
    "idiomatic",
    "language_pair",
    "note",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Human,
    Baseline,
    Modified,
    Google,
}

impl System {
    pub const ALL: [System; 4] = [System::Human, System::Baseline, System::Modified, System::Google];

    pub fn as_str(self) -> &'static str {
        match self {
            System::Human => "human",
            System::Baseline => "baseline",
            System::Modified => "modified",
            System::Google => "google",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        System::ALL
            .into_iter()
            .find(|sys| sys.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown system `{s}`")))
    }
}

/// Causes of sentiment change. Declaration order is the canonical order
/// used to break frequency ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReasonCode {
    /// Idiomatic or figurative language mistranslated.
    MI,
    /// Other language mistranslated.
    MO,
    /// Incorrect grammatical structure.
    IG,
    /// Source meaning irrecoverable.
    IR,
    /// Source not translatable into the target language.
    LT,
    /// Other.
    O,
}

impl ReasonCode {
    pub const ALL: [ReasonCode; 6] = [
        ReasonCode::MI,
        ReasonCode::MO,
        ReasonCode::IG,
        ReasonCode::IR,
        ReasonCode::LT,
        ReasonCode::O,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReasonCode::MI => "MI",
            ReasonCode::MO => "MO",
            ReasonCode::IG => "IG",
            ReasonCode::IR => "IR",
            ReasonCode::LT => "LT",
            ReasonCode::O => "O",
        }
    }
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReasonCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReasonCode::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown reason code `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    All,
    Idiomatic,
}

impl Subset {
    pub fn contains(self, idiomatic: bool) -> bool {
        match self {
            Subset::All => true,
            Subset::Idiomatic => idiomatic,
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subset::All => "all",
            Subset::Idiomatic => "idiomatic",
        })
    }
}

/// One annotator's judgment of one translation.
///
/// An empty `reasons` set means the annotator saw no sentiment change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub item_id: u64,
    pub system: System,
    pub annotator_id: String,
    pub accuracy: f64,
    pub senti_div: f64,
    pub reasons: BTreeSet<ReasonCode>,
    pub idiomatic: bool,
    pub language_pair: String,
    /// Free text accompanying code `O`; never used in statistics.
    pub note: Option<String>,
}

fn on_grid(v: f64, max: f64) -> bool {
    v.is_finite() && (0.0..=max).contains(&v) && (v / RATING_STEP).fract() == 0.0
}

/// Every invariant violation of `record`, empty when valid.
pub fn record_violations(record: &EvaluationRecord) -> Vec<String> {
    let mut out = Vec::new();
    if !on_grid(record.accuracy, ACCURACY_MAX) {
        out.push(format!(
            "accuracy {} is not on the 0.5 grid within [0, {ACCURACY_MAX}]",
            record.accuracy
        ));
    }
    if !on_grid(record.senti_div, SENTI_DIV_MAX) {
        out.push(format!(
            "senti_div {} is not on the 0.5 grid within [0, {SENTI_DIV_MAX}]",
            record.senti_div
        ));
    }
    if record.senti_div == 0.0 && !record.reasons.is_empty() {
        let codes: Vec<&str> = record.reasons.iter().map(|c| c.as_str()).collect();
        out.push(format!(
            "senti_div 0 means no sentiment change, but reasons {} were given",
            codes.join(";")
        ));
    }
    if record.annotator_id.trim().is_empty() {
        out.push("annotator_id is empty".into());
    }
    if record.language_pair.trim().is_empty() {
        out.push("language_pair is empty".into());
    }
    out
}

pub fn validate_record(record: EvaluationRecord) -> Result<EvaluationRecord> {
    let problems = record_violations(&record);
    if problems.is_empty() {
        Ok(record)
    } else {
        Err(Error::Validation(problems))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    item_id: String,
    system: String,
    annotator_id: String,
    accuracy: String,
    senti_div: String,
    reasons: String,
    idiomatic: String,
    language_pair: String,
    #[serde(default)]
    note: String,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn row_to_record(row: CsvRow) -> std::result::Result<EvaluationRecord, Vec<String>> {
    let mut problems = Vec::new();
    let item_id = row
        .item_id
        .trim()
        .parse()
        .map_err(|_| problems.push(format!("item_id `{}` is not a non-negative integer", row.item_id)))
        .unwrap_or_default();
    let system = row
        .system
        .parse()
        .map_err(|e: Error| problems.push(e.to_string()))
        .unwrap_or(System::Human);
    let mut rating = |name: &str, raw: &str| {
        raw.trim()
            .parse::<f64>()
            .map_err(|_| problems.push(format!("{name} `{raw}` is not a number")))
            .unwrap_or(0.0)
    };
    let accuracy = rating("accuracy", &row.accuracy);
    let senti_div = rating("senti_div", &row.senti_div);
    let mut reasons = BTreeSet::new();
    for code in row.reasons.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        match code.parse::<ReasonCode>() {
            Ok(c) => {
                reasons.insert(c);
            }
            Err(e) => problems.push(e.to_string()),
        }
    }
    let idiomatic = parse_bool(&row.idiomatic).unwrap_or_else(|| {
        problems.push(format!("idiomatic `{}` is not a boolean", row.idiomatic));
        false
    });
    let note = (!row.note.is_empty()).then_some(row.note);
    let record = EvaluationRecord {
        item_id,
        system,
        annotator_id: row.annotator_id,
        accuracy,
        senti_div,
        reasons,
        idiomatic,
        language_pair: row.language_pair,
        note,
    };
    if problems.is_empty() {
        problems = record_violations(&record);
    }
    if problems.is_empty() {
        Ok(record)
    } else {
        Err(problems)
    }
}

/// Reads and validates a records CSV. All violations across all rows are
/// reported together, each prefixed with its record number and line.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<EvaluationRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::Headers).from_reader(input);
    let headers = reader.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
    let expected: Vec<&str> = RECORD_HEADER.to_vec();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::parse(1, format!("header must be `{}`", RECORD_HEADER.join(","))));
    }
    let mut out = Vec::new();
    let mut problems = Vec::new();
    for (i, row) in reader.deserialize::<CsvRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(line, e.to_string()))?;
        match row_to_record(row) {
            Ok(r) => out.push(r),
            Err(errs) => problems.extend(errs.into_iter().map(|e| format!("record {} (line {line}): {e}", i + 1))),
        }
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(Error::Validation(problems))
    }
}

pub fn write_records_csv<W: Write>(records: &[EvaluationRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(RECORD_HEADER).map_err(csv_io)?;
    for r in records {
        let reasons: Vec<&str> = r.reasons.iter().map(|c| c.as_str()).collect();
        writer
            .write_record([
                r.item_id.to_string(),
                r.system.to_string(),
                r.annotator_id.clone(),
                r.accuracy.to_string(),
                r.senti_div.to_string(),
                reasons.join(";"),
                r.idiomatic.to_string(),
                r.language_pair.clone(),
                r.note.clone().unwrap_or_default(),
            ])
            .map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// A source text with the translations shown to annotators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationItem {
    pub item_id: u64,
    pub source_text: String,
    pub translations: BTreeMap<System, String>,
    pub idiomatic: bool,
}

impl EvaluationItem {
    /// Baseline, modified and Google output are mandatory; the human
    /// reference is optional (studies without a professional translation).
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.source_text.trim().is_empty() {
            out.push(format!("item {} has empty source text", self.item_id));
        }
        for sys in [System::Baseline, System::Modified, System::Google] {
            if !self.translations.contains_key(&sys) {
                out.push(format!("item {} lacks a {sys} translation", self.item_id));
            }
        }
        for (sys, text) in &self.translations {
            if text.trim().is_empty() {
                out.push(format!("item {}: {sys} translation is empty", self.item_id));
            }
        }
        out
    }
}

pub fn validate_items(items: &[EvaluationItem]) -> Result<()> {
    let mut problems: Vec<String> = items.iter().flat_map(EvaluationItem::violations).collect();
    let mut seen = BTreeSet::new();
    for item in items {
        if !seen.insert(item.item_id) {
            problems.push(format!("duplicate item id {}", item.item_id));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(problems))
    }
}

pub fn read_items_jsonl<R: BufRead>(input: R) -> Result<Vec<EvaluationItem>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?);
    }
    validate_items(&out)?;
    Ok(out)
}

pub fn write_items_jsonl<W: Write>(items: &[EvaluationItem], mut out: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(accuracy: f64, senti_div: f64, reasons: &[ReasonCode]) -> EvaluationRecord {
        EvaluationRecord {
            item_id: 1,
            system: System::Baseline,
            annotator_id: "a1".into(),
            accuracy,
            senti_div,
            reasons: reasons.iter().copied().collect(),
            idiomatic: false,
            language_pair: "en-es".into(),
            note: None,
        }
    }

    #[test]
    fn valid_record() {
        assert!(validate_record(record(4.5, 0.5, &[ReasonCode::MI])).is_ok());
        assert!(validate_record(record(0.0, 0.0, &[])).is_ok());
        assert!(validate_record(record(5.0, 2.0, &[ReasonCode::O])).is_ok());
    }

    #[test]
    fn off_grid_accuracy() {
        let err = validate_record(record(4.25, 0.5, &[])).unwrap_err();
        assert!(err.to_string().contains("accuracy 4.25"));
    }

    #[test]
    fn no_change_with_reasons() {
        let err = validate_record(record(3.0, 0.0, &[ReasonCode::MO])).unwrap_err();
        assert!(err.to_string().contains("reasons MO"));
    }

    #[test]
    fn all_violations_reported() {
        let mut r = record(5.5, 2.5, &[]);
        r.annotator_id = String::new();
        match validate_record(r).unwrap_err() {
            Error::Validation(v) => assert_eq!(v.len(), 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn csv_unknown_code_names_record() {
        let csv = "item_id,system,annotator_id,accuracy,senti_div,reasons,idiomatic,language_pair,note\n\
                   1,baseline,a,3,1,MI;XX,false,en-es,\n";
        let err = read_records_csv(csv.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("record 1 (line 2)"), "{msg}");
        assert!(msg.contains("XX"), "{msg}");
    }

    #[test]
    fn csv_bad_header() {
        let err = read_records_csv("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn csv_round_trip_with_quoting() {
        let mut r = record(2.5, 1.5, &[ReasonCode::O, ReasonCode::MI]);
        r.note = Some("says \"meh\", oddly".into());
        r.idiomatic = true;
        let mut buf = Vec::new();
        write_records_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        let back = read_records_csv(buf.as_slice()).unwrap();
        assert_eq!(back, vec![r]);
    }

    #[test]
    fn item_requires_mt_systems() {
        let item = EvaluationItem {
            item_id: 1,
            source_text: "hi".into(),
            translations: [(System::Baseline, "hola".to_string())].into(),
            idiomatic: false,
        };
        assert_eq!(item.violations().len(), 2);
    }
}
