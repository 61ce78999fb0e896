use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{normalize, Embedder, Role};
use crate::error::{Error, Result};
use crate::http::JsonClient;

#[derive(Debug, Serialize)]
pub struct EmbedRequest<'a> {
    pub role: Role,
    pub prompt: &'a str,
    pub texts: &'a [String],
}

#[derive(Debug, Deserialize)]
pub struct EmbedResponse {
    pub dim: usize,
    pub vectors: Vec<Vec<f32>>,
}

/// Client for a model service's `POST /embed`. Batches are sent one after
/// another so the number of requests is `ceil(n / batch_size)`.
#[derive(Debug, Clone)]
pub struct RemoteEmbedder {
    client: JsonClient,
    batch_size: usize,
}

impl RemoteEmbedder {
    pub fn new(endpoint: impl AsRef<str>, batch_size: usize, timeout: Duration) -> Self {
        RemoteEmbedder {
            client: JsonClient::new(endpoint.as_ref(), timeout),
            batch_size: batch_size.max(1),
        }
    }

    /// One request. Vectors come back in input order, re-normalized.
    pub fn embed_batch(
        &self,
        batch_index: usize,
        texts: &[String],
        role: Role,
        prompt: &str,
    ) -> Result<Vec<Vec<f32>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        if texts.len() > self.batch_size {
            return Err(Error::input(format!(
                "batch of {} exceeds batch_size {}",
                texts.len(),
                self.batch_size
            )));
        }
        let resp: EmbedResponse = self.client.post(
            "embed",
            &EmbedRequest {
                role,
                prompt,
                texts,
            },
            batch_index,
        )?;
        if resp.vectors.len() != texts.len() {
            return Err(Error::protocol(format!(
                "batch {batch_index}: {} vectors for {} texts",
                resp.vectors.len(),
                texts.len()
            )));
        }
        resp.vectors
            .into_iter()
            .enumerate()
            .map(|(i, mut v)| {
                if v.len() != resp.dim || resp.dim == 0 {
                    return Err(Error::protocol(format!(
                        "batch {batch_index}: vector {i} has dim {}, response declares {}",
                        v.len(),
                        resp.dim
                    )));
                }
                if !normalize(&mut v) {
                    return Err(Error::protocol(format!(
                        "batch {batch_index}: vector {i} is zero or non-finite"
                    )));
                }
                Ok(v)
            })
            .collect()
    }
}

impl Embedder for RemoteEmbedder {
    fn embed(&self, texts: &[String], role: Role, prompt: &str) -> Result<Vec<Vec<f32>>> {
        let mut out = Vec::with_capacity(texts.len());
        let mut dim = None;
        for (batch_index, chunk) in texts.chunks(self.batch_size).enumerate() {
            let vectors = self.embed_batch(batch_index, chunk, role, prompt)?;
            if let Some(first) = vectors.first() {
                match dim {
                    None => dim = Some(first.len()),
                    Some(d) if d != first.len() => {
                        return Err(Error::protocol(format!(
                            "batch {batch_index} has dim {}, earlier batches had {d}",
                            first.len()
                        )))
                    }
                    Some(_) => {}
                }
            }
            out.extend(vectors);
        }
        Ok(out)
    }
}
