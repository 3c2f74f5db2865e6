//! Client for a remote MT backend that returns n-best lists.
//!
//! Wire protocol, `POST {address}/translate`:
//!
//! ```text
//! request:  {"text": string, "source_lang": string, "target_lang": string,
//!            "num_candidates": int, "beam_size": int}
//! response: {"candidates": [{"text": string, "score": real?}...]}
//! ```

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::http::JsonClient;

use super::{NBestList, SourceSegment};

pub const TRANSLATE_PATH: &str = "/translate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub text: String,
    pub source_lang: String,
    pub target_lang: String,
    pub num_candidates: usize,
    pub beam_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendCandidate {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub candidates: Vec<BackendCandidate>,
}

#[derive(Debug, Clone)]
pub struct MtBackend {
    client: JsonClient,
    target_lang: String,
}

impl MtBackend {
    pub fn new(address: &str, target_lang: &str, timeout: Duration) -> Self {
        MtBackend {
            client: JsonClient::new(address, timeout),
            target_lang: target_lang.to_string(),
        }
    }

    pub fn address(&self) -> &str {
        self.client.address()
    }

    /// Asks the backend for up to `num_candidates` translations of `source`.
    /// Extra candidates beyond `num_candidates` are dropped.
    pub fn request_candidates(
        &self,
        source: &SourceSegment,
        num_candidates: usize,
        beam_size: usize,
    ) -> Result<NBestList> {
        if num_candidates == 0 || num_candidates > beam_size {
            return Err(Error::invalid(format!(
                "need 1 <= num_candidates ({num_candidates}) <= beam_size ({beam_size})"
            )));
        }
        let request = TranslateRequest {
            text: source.text.clone(),
            source_lang: source.language.clone(),
            target_lang: self.target_lang.clone(),
            num_candidates,
            beam_size,
        };
        let response: TranslateResponse = self.client.post(TRANSLATE_PATH, &request)?;
        if response.candidates.is_empty() {
            return Err(Error::EmptyResult(source.id));
        }
        NBestList::from_texts(
            source.id,
            Some(source.text.clone()),
            response
                .candidates
                .into_iter()
                .take(num_candidates)
                .map(|c| (c.text, c.score)),
            num_candidates,
        )
        .map_err(|e| Error::Protocol(e.to_string()))
    }
}
