//! JSONL n-best format, one object per source:
//!
//! ```text
//! {"id": 7, "source": "...", "candidates": [{"text": "...", "score": -1.5}, ...]}
//! ```
//!
//! `score` is optional. A missing source text is written as `""`.

use std::collections::btree_map::Entry;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Candidate, NBestList, NBestMap};

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: u64,
    source: String,
    candidates: Vec<RecordCandidate>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordCandidate {
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

pub fn parse_jsonl_nbest<R: BufRead>(input: R, max_len: usize) -> Result<NBestMap> {
    let mut out = NBestMap::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        let source = (!rec.source.is_empty()).then_some(rec.source);
        let list = NBestList::from_texts(
            rec.id,
            source,
            rec.candidates.into_iter().map(|c| (c.text, c.score)),
            max_len,
        )
        .map_err(|e| Error::parse(lineno, e.to_string()))?;
        match out.entry(rec.id) {
            Entry::Occupied(_) => {
                return Err(Error::parse(lineno, format!("duplicate id {}", rec.id)));
            }
            Entry::Vacant(slot) => {
                slot.insert(list);
            }
        }
    }
    Ok(out)
}

pub fn write_jsonl_nbest<W: Write>(lists: &NBestMap, mut out: W) -> Result<()> {
    for list in lists.values() {
        let rec = Record {
            id: list.source_id,
            source: list.source.clone().unwrap_or_default(),
            candidates: list
                .candidates()
                .iter()
                .map(|c: &Candidate| RecordCandidate {
                    text: c.text.clone(),
                    score: c.model_score,
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
