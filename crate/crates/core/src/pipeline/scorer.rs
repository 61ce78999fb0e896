//! Stage-2 pair scorers. Every scorer maps `(document, subject)` pairs to
//! relevance scores in `[0, 1]`, one per pair, in order.

use std::collections::{HashMap, HashSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::http::JsonClient;
use crate::text::trigrams;

#[derive(Debug, Clone, Copy)]
pub struct PairInput<'a> {
    pub doc_id: &'a str,
    pub subject_code: &'a str,
    pub doc_text: &'a str,
    pub subject_text: &'a str,
}

pub trait PairScorer: Send + Sync {
    fn score(&self, pairs: &[PairInput<'_>]) -> Result<Vec<f32>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Passthrough,
    Lexical,
    Remote,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    pub kind: ScorerKind,
    pub endpoint: Option<String>,
    pub batch_size: usize,
    pub timeout_secs: u64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            kind: ScorerKind::Lexical,
            endpoint: None,
            batch_size: 64,
            timeout_secs: 120,
        }
    }
}

impl ScorerConfig {
    pub fn of(kind: ScorerKind) -> Self {
        ScorerConfig {
            kind,
            ..Default::default()
        }
    }

    /// `documents` supplies gold labels for the oracle scorer and is ignored
    /// by the others.
    pub fn build(&self, documents: &[Document]) -> Result<Box<dyn PairScorer>> {
        if self.batch_size == 0 {
            return Err(Error::input("scorer batch_size must be positive"));
        }
        Ok(match self.kind {
            ScorerKind::Passthrough => Box::new(PassthroughScorer),
            ScorerKind::Lexical => Box::new(LexicalScorer),
            ScorerKind::Oracle => Box::new(OracleScorer::from_documents(documents)?),
            ScorerKind::Remote => {
                let endpoint = self
                    .endpoint
                    .as_deref()
                    .ok_or_else(|| Error::input("remote scorer requires an endpoint"))?;
                Box::new(RemoteScorer::new(
                    endpoint,
                    self.batch_size,
                    Duration::from_secs(self.timeout_secs),
                ))
            }
        })
    }
}

/// Scores every pair 0.5, so re-ranking falls back to stage-1 order.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassthroughScorer;

impl PairScorer for PassthroughScorer {
    fn score(&self, pairs: &[PairInput<'_>]) -> Result<Vec<f32>> {
        Ok(vec![0.5; pairs.len()])
    }
}

/// Jaccard similarity of the two texts' padded lowercase trigram sets.
pub fn lexical_score(a: &str, b: &str) -> f32 {
    let sa: HashSet<_> = trigrams(a).into_iter().collect();
    let sb: HashSet<_> = trigrams(b).into_iter().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f32 / union as f32
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

impl PairScorer for LexicalScorer {
    fn score(&self, pairs: &[PairInput<'_>]) -> Result<Vec<f32>> {
        Ok(pairs
            .iter()
            .map(|p| lexical_score(p.doc_text, p.subject_text))
            .collect())
    }
}

/// 1.0 for gold pairs, 0.0 otherwise. Evaluation-only.
#[derive(Debug, Clone, Default)]
pub struct OracleScorer {
    gold: HashMap<String, HashSet<String>>,
}

impl OracleScorer {
    pub fn from_documents(documents: &[Document]) -> Result<Self> {
        let gold: HashMap<_, _> = documents
            .iter()
            .filter(|d| !d.gold_subjects.is_empty())
            .map(|d| (d.id.clone(), d.gold_subjects.iter().cloned().collect()))
            .collect();
        if gold.is_empty() {
            return Err(Error::input(
                "oracle scorer needs gold labels, but no document has any",
            ));
        }
        Ok(OracleScorer { gold })
    }
}

impl PairScorer for OracleScorer {
    fn score(&self, pairs: &[PairInput<'_>]) -> Result<Vec<f32>> {
        Ok(pairs
            .iter()
            .map(|p| match self.gold.get(p.doc_id) {
                Some(g) if g.contains(p.subject_code) => 1.0,
                _ => 0.0,
            })
            .collect())
    }
}

#[derive(Debug, Serialize)]
struct ScoreRequest<'a> {
    pairs: Vec<WirePair<'a>>,
}

#[derive(Debug, Serialize)]
struct WirePair<'a> {
    left: &'a str,
    right: &'a str,
}

#[derive(Debug, Deserialize)]
struct ScoreResponse {
    scores: Vec<f32>,
}

/// Client for a model service's `POST /score`. Out-of-range scores are
/// rejected rather than clamped.
#[derive(Debug, Clone)]
pub struct RemoteScorer {
    client: JsonClient,
    batch_size: usize,
}

impl RemoteScorer {
    pub fn new(endpoint: &str, batch_size: usize, timeout: Duration) -> Self {
        RemoteScorer {
            client: JsonClient::new(endpoint, timeout),
            batch_size: batch_size.max(1),
        }
    }
}

impl PairScorer for RemoteScorer {
    fn score(&self, pairs: &[PairInput<'_>]) -> Result<Vec<f32>> {
        let mut out = Vec::with_capacity(pairs.len());
        for (batch, chunk) in pairs.chunks(self.batch_size).enumerate() {
            let req = ScoreRequest {
                pairs: chunk
                    .iter()
                    .map(|p| WirePair {
                        left: p.doc_text,
                        right: p.subject_text,
                    })
                    .collect(),
            };
            let resp: ScoreResponse = self.client.post("score", &req, batch)?;
            if resp.scores.len() != chunk.len() {
                return Err(Error::protocol(format!(
                    "batch {batch}: {} scores for {} pairs",
                    resp.scores.len(),
                    chunk.len()
                )));
            }
            if let Some(bad) = resp.scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
                return Err(Error::protocol(format!(
                    "batch {batch}: score {bad} outside [0, 1]"
                )));
            }
            out.extend(resp.scores);
        }
        Ok(out)
    }
}

/// Scores `pairs` with the scorer described by `cfg`.
pub fn score_pairs(
    cfg: &ScorerConfig,
    documents: &[Document],
    pairs: &[PairInput<'_>],
) -> Result<Vec<f32>> {
    if let Some(p) = pairs
        .iter()
        .find(|p| p.doc_text.trim().is_empty() || p.subject_text.trim().is_empty())
    {
        return Err(Error::input(format!(
            "empty text in pair ({}, {})",
            p.doc_id, p.subject_code
        )));
    }
    cfg.build(documents)?.score(pairs)
}
