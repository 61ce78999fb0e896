//! Unit-norm text embeddings for documents and subjects.
//!
//! Two embedders sit behind [`EmbedderConfig`]: a deterministic character
//! trigram hasher that needs no model, and an HTTP client for a model service
//! speaking the `/embed` protocol. Both receive the same prompted text, built
//! as `prompt + "\n" + text` using the role's prompt from [`PromptConfig`].

mod hash;
mod io;
mod remote;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hash::{hash_embed, HashEmbedder};
pub use io::{load_matrix, matrix_file_size, save_matrix};
pub use remote::RemoteEmbedder;

/// Largest deviation from 1.0 tolerated in a stored row norm.
pub const NORM_TOLERANCE: f32 = 1e-4;

pub const DEFAULT_DOCUMENT_PROMPT: &str = "Instruct: Given the following title and abstract for the document, retrieve the relevant subjects classifying the document";
pub const DEFAULT_SUBJECT_PROMPT: &str = "Query:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Document,
    Subject,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Document => "document",
            Role::Subject => "subject",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptConfig {
    pub document_prompt: String,
    pub subject_prompt: String,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig {
            document_prompt: DEFAULT_DOCUMENT_PROMPT.to_owned(),
            subject_prompt: DEFAULT_SUBJECT_PROMPT.to_owned(),
        }
    }
}

impl PromptConfig {
    pub fn prompt(&self, role: Role) -> &str {
        match role {
            Role::Document => &self.document_prompt,
            Role::Subject => &self.subject_prompt,
        }
    }

    /// The exact string handed to the encoder. An empty prompt leaves the
    /// text unchanged.
    pub fn apply(&self, role: Role, text: &str) -> String {
        let prompt = self.prompt(role);
        if prompt.is_empty() {
            text.to_owned()
        } else {
            format!("{prompt}\n{text}")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    Hash,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedderConfig {
    pub kind: EmbedderKind,
    /// Output dimension of the hash embedder; ignored for remote.
    pub dim: usize,
    pub endpoint: Option<String>,
    pub batch_size: usize,
    pub seed: u64,
    pub timeout_secs: u64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            kind: EmbedderKind::Hash,
            dim: 256,
            endpoint: None,
            batch_size: 64,
            seed: 7,
            timeout_secs: 60,
        }
    }
}

impl EmbedderConfig {
    pub fn hash(dim: usize, seed: u64) -> Self {
        EmbedderConfig {
            dim,
            seed,
            ..Default::default()
        }
    }

    pub fn remote(endpoint: impl Into<String>, batch_size: usize) -> Self {
        EmbedderConfig {
            kind: EmbedderKind::Remote,
            endpoint: Some(endpoint.into()),
            batch_size,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::input("embedder batch_size must be positive"));
        }
        match self.kind {
            EmbedderKind::Hash if self.dim < hash::MIN_DIM => Err(Error::input(format!(
                "hash embedder dim must be at least {}, got {}",
                hash::MIN_DIM,
                self.dim
            ))),
            EmbedderKind::Remote if self.endpoint.is_none() => {
                Err(Error::input("remote embedder requires an endpoint"))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Embedder>> {
        self.validate()?;
        Ok(match self.kind {
            EmbedderKind::Hash => Box::new(HashEmbedder::new(self.dim, self.seed)?),
            EmbedderKind::Remote => Box::new(RemoteEmbedder::new(
                self.endpoint.clone().expect("validated"),
                self.batch_size,
                std::time::Duration::from_secs(self.timeout_secs),
            )),
        })
    }
}

/// Something that turns already-prompted texts into vectors.
///
/// `prompt` is the prompt that was applied, passed along for services that
/// want to log or verify it.
pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[String], role: Role, prompt: &str) -> Result<Vec<Vec<f32>>>;
}

/// Id-aligned, unit-norm, fixed-dimension rows stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f32>,
    index: HashMap<String, usize>,
}

impl EmbeddingMatrix {
    /// Checks shape, id uniqueness and the unit-norm contract.
    pub fn new(ids: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("embedding dim must be positive"));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::input(format!(
                "{} ids need {} values at dim {dim}, got {}",
                ids.len(),
                ids.len() * dim,
                data.len()
            )));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    kind: "matrix id",
                    id: id.clone(),
                });
            }
        }
        for (i, row) in data.chunks_exact(dim).enumerate() {
            let norm = norm(row);
            if norm.is_nan() || (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::input(format!(
                    "row `{}` has norm {norm}, expected 1.0",
                    ids[i]
                )));
            }
        }
        Ok(EmbeddingMatrix {
            ids,
            dim,
            data,
            index,
        })
    }

    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<f32>>) -> Result<Self> {
        let dim = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::input("cannot build a matrix from zero rows"))?;
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::input(format!(
                "row {i} has dim {}, expected {dim}",
                r.len()
            )));
        }
        Self::new(ids, dim, rows.concat())
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.position(id).map(|i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f32]) -> f32 {
    a.iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt() as f32
}

/// Scales `v` to unit length in place. Returns false for a zero or
/// non-finite vector, which is left untouched.
pub fn normalize(v: &mut [f32]) -> bool {
    let n = v
        .iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt();
    if !(n.is_finite() && n > 0.0) {
        return false;
    }
    for x in v.iter_mut() {
        *x = (f64::from(*x) / n) as f32;
    }
    true
}

/// Embeds `(id, text)` pairs in input order, prepending the role's prompt.
pub fn embed_corpus(
    embedder: &EmbedderConfig,
    texts: &[(String, String)],
    role: Role,
    prompts: &PromptConfig,
) -> Result<EmbeddingMatrix> {
    let model = embedder.build()?;
    embed_with(model.as_ref(), texts, role, prompts)
}

pub fn embed_with(
    embedder: &dyn Embedder,
    texts: &[(String, String)],
    role: Role,
    prompts: &PromptConfig,
) -> Result<EmbeddingMatrix> {
    if texts.is_empty() {
        return Err(Error::input("nothing to embed"));
    }
    if let Some((id, _)) = texts.iter().find(|(_, t)| t.trim().is_empty()) {
        return Err(Error::input(format!("empty text for `{id}`")));
    }
    let prompted: Vec<String> = texts
        .par_iter()
        .map(|(_, t)| prompts.apply(role, t))
        .collect();
    let rows = embedder.embed(&prompted, role, prompts.prompt(role))?;
    if rows.len() != texts.len() {
        return Err(Error::protocol(format!(
            "embedder returned {} vectors for {} texts",
            rows.len(),
            texts.len()
        )));
    }
    let ids = texts.iter().map(|(id, _)| id.clone()).collect();
    EmbeddingMatrix::from_rows(ids, rows)
}
