//! Client for a remote model scorer.
//!
//! Wire protocol, `POST {address}/score`:
//!
//! ```text
//! request:  {"texts": [string...], "language": string}
//! response: {"scores": [real...], "probabilities": [[real...]...], "class_values": [real...]}
//! ```
//!
//! Transport failures and non-2xx statuses map to `BackendUnavailable`;
//! responses that violate the protocol map to `Protocol`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::http::JsonClient;

use super::{ClassDistribution, SentimentScorer};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const SCORE_PATH: &str = "/score";

/// Tolerance the service guarantees for `scores[i] = sum_n p[i][n] * v[n]`
/// and for each probability row summing to 1.
pub const PROTOCOL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub texts: Vec<String>,
    pub language: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
    pub class_values: Vec<f64>,
}

impl ScoreResponse {
    /// Checks the response against the protocol and converts it into one
    /// distribution per requested text.
    pub fn into_distributions(self, expected: usize) -> Result<Vec<ClassDistribution>> {
        if self.scores.len() != expected || self.probabilities.len() != expected {
            return Err(Error::Protocol(format!(
                "expected {expected} results, got {} scores and {} probability rows",
                self.scores.len(),
                self.probabilities.len()
            )));
        }
        let m = self.class_values.len();
        let labels = default_labels(m);
        self.probabilities
            .into_iter()
            .zip(self.scores)
            .enumerate()
            .map(|(i, (mut row, score))| {
                if row.len() != m {
                    return Err(Error::Protocol(format!(
                        "row {i} has {} probabilities for {m} classes",
                        row.len()
                    )));
                }
                let total: f64 = row.iter().sum();
                if !total.is_finite() || (total - 1.0).abs() > PROTOCOL_TOLERANCE {
                    return Err(Error::Protocol(format!("row {i} sums to {total}")));
                }
                row.iter_mut().for_each(|p| *p /= total);
                let recomputed: f64 = row.iter().zip(&self.class_values).map(|(p, v)| p * v).sum();
                if !score.is_finite() || (recomputed - score).abs() > PROTOCOL_TOLERANCE {
                    return Err(Error::Protocol(format!(
                        "row {i}: score {score} disagrees with probabilities ({recomputed})"
                    )));
                }
                ClassDistribution::new(row, self.class_values.clone(), labels.clone())
                    .map_err(|e| Error::Protocol(format!("row {i}: {e}")))
            })
            .collect()
    }
}

fn default_labels(m: usize) -> Vec<String> {
    if m == 2 {
        vec!["negative".into(), "positive".into()]
    } else {
        (0..m).map(|i| format!("class{i}")).collect()
    }
}

pub struct RemoteScorer {
    id: String,
    language: String,
    client: JsonClient,
}

impl RemoteScorer {
    pub fn new(address: &str, language: &str, timeout: Duration) -> Self {
        let client = JsonClient::new(address, timeout);
        RemoteScorer {
            id: format!("remote:{language}@{}", client.address()),
            language: language.to_string(),
            client,
        }
    }
}

impl SentimentScorer for RemoteScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn distribution(&self, text: &str) -> Result<ClassDistribution> {
        let mut out = self.distributions(&[text])?;
        Ok(out.remove(0))
    }

    fn distributions(&self, texts: &[&str]) -> Result<Vec<ClassDistribution>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let request = ScoreRequest {
            texts: texts.iter().map(|t| t.to_string()).collect(),
            language: self.language.clone(),
        };
        let response: ScoreResponse = self.client.post(SCORE_PATH, &request)?;
        response.into_distributions(texts.len())
    }
}
