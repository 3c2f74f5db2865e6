//! Moses n-best format: `id ||| hypothesis ||| features ||| total_score`.

use std::io::BufRead;

use crate::error::{Error, Result};

use super::{Candidate, NBestList, NBestMap};

const SEPARATOR: &str = "|||";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MosesParse {
    pub lists: NBestMap,
    /// Non-fatal findings, e.g. model scores that rise with rank.
    pub warnings: Vec<String>,
}

fn parse_line(line: &str, lineno: usize) -> Result<(u64, String, String, f64)> {
    let fields: Vec<&str> = line.split(SEPARATOR).map(str::trim).collect();
    if fields.len() != 4 {
        return Err(Error::parse(
            lineno,
            format!("expected 4 `|||`-separated fields, found {}", fields.len()),
        ));
    }
    let id: u64 = fields[0]
        .parse()
        .map_err(|_| Error::parse(lineno, format!("invalid segment id `{}`", fields[0])))?;
    if fields[1].is_empty() {
        return Err(Error::parse(lineno, "empty hypothesis"));
    }
    let score: f64 = fields[3]
        .parse()
        .map_err(|_| Error::parse(lineno, format!("invalid total score `{}`", fields[3])))?;
    if !score.is_finite() {
        return Err(Error::parse(lineno, format!("non-finite total score `{}`", fields[3])));
    }
    if score > 0.0 {
        return Err(Error::parse(
            lineno,
            format!("total score {score} is not a log-probability"),
        ));
    }
    Ok((id, fields[1].to_string(), fields[2].to_string(), score))
}

/// Groups lines by segment id; ranks follow order of appearance.
pub fn parse_moses_nbest<R: BufRead>(input: R, max_len: usize) -> Result<MosesParse> {
    let mut out = MosesParse::default();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let (id, text, features, score) = parse_line(&line, lineno)?;
        let list = out.lists.entry(id).or_insert_with(|| NBestList {
            source_id: id,
            source: None,
            candidates: Vec::new(),
        });
        if list.candidates.len() >= max_len {
            return Err(Error::parse(
                lineno,
                format!("segment {id} exceeds the maximum of {max_len} candidates"),
            ));
        }
        let rank = list.candidates.len();
        list.candidates.push(Candidate {
            rank,
            text,
            model_score: Some(score),
            features: Some(features),
        });
    }
    for list in out.lists.values() {
        out.warnings.extend(list.score_warnings());
    }
    Ok(out)
}
