//! Blocking JSON-over-HTTP calls shared by the remote embedder and scorer.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
}

#[derive(Clone)]
pub(crate) struct JsonClient {
    agent: ureq::Agent,
    base: String,
}

impl std::fmt::Debug for JsonClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JsonClient")
            .field("base", &self.base)
            .finish()
    }
}

impl JsonClient {
    pub fn new(endpoint: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        JsonClient {
            agent,
            base: endpoint.trim_end_matches('/').to_owned(),
        }
    }

    /// POSTs `body` to `{endpoint}/{route}`. Network failures and non-2xx
    /// statuses are transport errors tagged with `batch`; an undecodable 2xx
    /// body is a protocol error.
    pub fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        route: &str,
        body: &Req,
        batch: usize,
    ) -> Result<Resp> {
        let url = format!("{}/{route}", self.base);
        let transport = |message: String| Error::Transport { batch, message };
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| transport(format!("POST {url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.body_mut().read_to_string().unwrap_or_default();
            let detail = serde_json::from_str::<ErrorBody>(&text)
                .map(|b| b.error)
                .unwrap_or(text);
            return Err(transport(format!("POST {url}: HTTP {status}: {detail}")));
        }
        resp.body_mut()
            .read_json::<Resp>()
            .map_err(|e| Error::protocol(format!("POST {url}: undecodable response: {e}")))
    }
}
