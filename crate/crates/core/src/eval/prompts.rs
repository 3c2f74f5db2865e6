//! Blinded prompt sheets for human evaluation.
//!
//! Every (item, system) translation becomes one numbered prompt. Prompt
//! order is a seeded shuffle; system names never appear in the sheet and
//! are recorded only in the key.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::records::{validate_items, EvaluationItem, ReasonCode, System};

/// Checklist shown with every prompt, in display order. `None` is the
/// "no change" option, recorded as an empty reason set.
pub const CHECKLIST: [(Option<ReasonCode>, &str); 7] = [
    (
        Some(ReasonCode::MI),
        "Figurative or idiomatic wording was translated literally",
    ),
    (Some(ReasonCode::MO), "Other words or phrases were mistranslated"),
    (Some(ReasonCode::IG), "The translation's grammar is wrong"),
    (
        Some(ReasonCode::IR),
        "The meaning is lost; not even the gist of the source survives",
    ),
    (
        Some(ReasonCode::LT),
        "The source cannot be properly expressed in the target language",
    ),
    (None, "The sentiment did not change"),
    (Some(ReasonCode::O), "Other (please describe next to this line)"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    /// 1-based position in the sheet.
    pub index: usize,
    pub item_id: u64,
    pub system: System,
    pub source_text: String,
    pub translation: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSheet {
    pub prompts: Vec<Prompt>,
    pub document: String,
}

impl PromptSheet {
    /// prompt index -> system, kept apart from the sheet for blinding.
    pub fn key(&self) -> BTreeMap<usize, System> {
        self.prompts.iter().map(|p| (p.index, p.system)).collect()
    }

    pub fn key_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.key())?)
    }
}

pub fn generate_prompt_sheet(items: &[EvaluationItem], shuffle_seed: u64) -> Result<PromptSheet> {
    validate_items(items)?;
    let mut pairs: Vec<(&EvaluationItem, System, &str)> = items
        .iter()
        .flat_map(|item| {
            item.translations
                .iter()
                .map(move |(sys, text)| (item, *sys, text.as_str()))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    pairs.shuffle(&mut rng);

    let prompts: Vec<Prompt> = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (item, system, text))| Prompt {
            index: i + 1,
            item_id: item.item_id,
            system,
            source_text: item.source_text.clone(),
            translation: text.to_string(),
        })
        .collect();
    let document = render(&prompts);
    Ok(PromptSheet { prompts, document })
}

fn render(prompts: &[Prompt]) -> String {
    let mut doc = String::new();
    let _ = writeln!(doc, "# Translation evaluation\n");
    let _ = writeln!(
        doc,
        "This sheet holds {} numbered prompts. Each shows a source text and one translation of it. For every prompt:\n",
        prompts.len()
    );
    doc.push_str(
        "1. Accuracy: score the translation from 0 (unusable) through 2.5 (acceptable) to 5 (flawless). \
         Half points such as 1.5 or 3.5 are allowed.\n\
         2. Sentiment divergence: score from 0 (the translation carries exactly the source's sentiment) \
         to 2 (the sentiment is reversed). Half points are allowed.\n\
         3. Reasons: mark every checklist line that explains why the sentiment changed. \
         If it did not change, mark only that line.\n",
    );
    for p in prompts {
        let _ = writeln!(doc, "\n---\n\n## Prompt {} (item {})\n", p.index, p.item_id);
        let _ = writeln!(doc, "**Source:** {}\n", p.source_text);
        let _ = writeln!(doc, "**Translation:** {}\n", p.translation);
        doc.push_str("- Accuracy (0-5):\n- Sentiment divergence (0-2):\n- Reasons the sentiment changed (mark all that apply):\n");
        for (i, (code, text)) in CHECKLIST.iter().enumerate() {
            let tag = code.map_or_else(|| "--".to_string(), |c| c.to_string());
            let _ = writeln!(doc, "  {}. [{tag}] {text}", i + 1);
        }
    }
    doc
}
