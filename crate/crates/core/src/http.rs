use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;
use ureq::Agent;

use crate::error::{Error, Result};

/// Blocking JSON-over-HTTP client shared by the remote backends.
///
/// `ureq::Agent` pools connections internally and is safe to share across
/// threads; every request carries the configured timeout.
#[derive(Debug, Clone)]
pub(crate) struct JsonClient {
    base: String,
    agent: Agent,
}

impl JsonClient {
    pub fn new(address: &str, timeout: Duration) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        JsonClient {
            base: address.trim_end_matches('/').to_string(),
            agent,
        }
    }

    pub fn address(&self) -> &str {
        &self.base
    }

    pub fn post<Req: Serialize, Resp: DeserializeOwned>(&self, path: &str, body: &Req) -> Result<Resp> {
        if !(self.base.starts_with("http://") || self.base.starts_with("https://")) {
            return Err(Error::invalid(format!(
                "backend address `{}` must be an http(s) URL",
                self.base
            )));
        }
        let url = format!("{}{path}", self.base);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| Error::BackendUnavailable(format!("{url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::BackendUnavailable(format!("{url}: HTTP {}", status.as_u16())));
        }
        resp.body_mut()
            .read_json()
            .map_err(|e| Error::Protocol(format!("{url}: malformed response: {e}")))
    }
}
