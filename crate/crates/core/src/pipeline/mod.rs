//! Two-stage tagging: forest retrieval of `n_candidates` subjects per
//! document, then pair-scorer re-ranking of exactly those candidates.
//!
//! Documents are processed independently and in parallel. A document that
//! fails (missing vector, scorer error) is recorded in the run's failure list
//! instead of aborting the run.

mod pairs;
mod run;
mod scorer;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ann::{Candidate, ForestIndex, RPForest, DEFAULT_SEARCH_K};
use crate::corpus::{render_document_text, render_subject_text, Corpus, Document, Subject};
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};

pub use pairs::{generate_training_pairs, pairs_to_jsonl, parse_pairs, LabeledPair};
pub use run::{summary_path, Failure, RankedItem, RankedRun, RunEntry, RunSummary, Stage};
pub use scorer::{
    lexical_score, score_pairs, LexicalScorer, OracleScorer, PairInput, PairScorer,
    PassthroughScorer, RemoteScorer, ScorerConfig, ScorerKind,
};

pub const DEFAULT_N_CANDIDATES: usize = 512;
pub const DEFAULT_OUTPUT_K: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub n_candidates: usize,
    pub search_k: usize,
    pub output_k: usize,
    pub scorer: ScorerConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_candidates: DEFAULT_N_CANDIDATES,
            search_k: DEFAULT_SEARCH_K,
            output_k: DEFAULT_OUTPUT_K,
            scorer: ScorerConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates == 0 || self.search_k == 0 || self.output_k == 0 {
            return Err(Error::input(
                "n_candidates, search_k and output_k must be positive",
            ));
        }
        if self.output_k > self.n_candidates {
            return Err(Error::input(format!(
                "output_k {} exceeds n_candidates {}",
                self.output_k, self.n_candidates
            )));
        }
        Ok(())
    }
}

/// Stage 1 for one document: the forest's top `n_candidates`.
pub fn retrieve_candidates(
    doc_vec: &[f32],
    index: &ForestIndex<'_>,
    cfg: &PipelineConfig,
) -> Result<Vec<Candidate>> {
    index.query(doc_vec, cfg.n_candidates, cfg.search_k)
}

/// Rendered subject texts keyed by code.
pub fn subject_texts(subjects: &[Subject]) -> HashMap<String, String> {
    subjects
        .iter()
        .map(|s| (s.code.clone(), render_subject_text(s)))
        .collect()
}

/// Stage 2 for one document. Scores every candidate against the document
/// text and orders by score, then stage-1 rank, then code; keeps `output_k`.
pub fn rerank(
    doc: &Document,
    candidates: &[Candidate],
    subject_texts: &HashMap<String, String>,
    scorer: &dyn PairScorer,
    output_k: usize,
) -> Result<Vec<RankedItem>> {
    if candidates.is_empty() {
        return Err(Error::input(format!(
            "document `{}` has no candidates to re-rank",
            doc.id
        )));
    }
    let doc_text = render_document_text(doc);
    let pairs = candidates
        .iter()
        .map(|c| {
            let subject_text = subject_texts.get(&c.subject_code).ok_or_else(|| {
                Error::input(format!(
                    "candidate `{}` is not in the taxonomy",
                    c.subject_code
                ))
            })?;
            Ok(PairInput {
                doc_id: &doc.id,
                subject_code: &c.subject_code,
                doc_text: &doc_text,
                subject_text,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scores = scorer.score(&pairs)?;
    if scores.len() != candidates.len() {
        return Err(Error::protocol(format!(
            "scorer returned {} scores for {} pairs",
            scores.len(),
            candidates.len()
        )));
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(candidates[a].rank.cmp(&candidates[b].rank))
            .then_with(|| candidates[a].subject_code.cmp(&candidates[b].subject_code))
    });
    Ok(order
        .into_iter()
        .take(output_k)
        .map(|i| RankedItem {
            subject: candidates[i].subject_code.clone(),
            score: scores[i],
        })
        .collect())
}

fn to_items(candidates: Vec<Candidate>) -> Vec<RankedItem> {
    candidates
        .into_iter()
        .map(|c| RankedItem {
            subject: c.subject_code,
            score: c.score,
        })
        .collect()
}

fn to_candidates(items: &[RankedItem]) -> Vec<Candidate> {
    items
        .iter()
        .enumerate()
        .map(|(i, r)| Candidate {
            subject_code: r.subject.clone(),
            score: r.score,
            rank: i + 1,
        })
        .collect()
}

fn split_outcomes(
    outcomes: Vec<(String, Result<Vec<RankedItem>>)>,
    mut failures: Vec<Failure>,
) -> (Vec<RunEntry>, Vec<Failure>) {
    let mut entries = Vec::with_capacity(outcomes.len());
    for (doc_id, outcome) in outcomes {
        match outcome {
            Ok(ranked) => entries.push(RunEntry { doc_id, ranked }),
            Err(e) => failures.push(Failure {
                doc_id,
                error: e.to_string(),
            }),
        }
    }
    (entries, failures)
}

/// Stage-1 candidate lists (length up to `n_candidates`) for every document.
pub fn retrieve_run(
    documents: &[Document],
    doc_vectors: &EmbeddingMatrix,
    index: &ForestIndex<'_>,
    cfg: &PipelineConfig,
) -> Result<RankedRun> {
    cfg.validate()?;
    let outcomes = documents
        .par_iter()
        .map(|d| {
            let outcome = doc_vectors
                .get(&d.id)
                .ok_or_else(|| Error::input(format!("no embedding for document `{}`", d.id)))
                .and_then(|v| retrieve_candidates(v, index, cfg))
                .map(to_items);
            (d.id.clone(), outcome)
        })
        .collect();
    let (entries, failures) = split_outcomes(outcomes, Vec::new());
    Ok(RankedRun {
        run_id: "candidates".into(),
        stage: Stage::Stage1,
        entries,
        failures,
    })
}

/// Re-ranks every document of a candidate run.
pub fn rerank_run(
    corpus: &Corpus,
    candidates: &RankedRun,
    scorer: &dyn PairScorer,
    cfg: &PipelineConfig,
) -> Result<RankedRun> {
    cfg.validate()?;
    let texts = subject_texts(&corpus.subjects);
    let docs: HashMap<&str, &Document> = corpus
        .documents
        .iter()
        .map(|d| (d.id.as_str(), d))
        .collect();
    let outcomes = candidates
        .entries
        .par_iter()
        .map(|e| {
            let outcome = docs
                .get(e.doc_id.as_str())
                .ok_or_else(|| Error::input(format!("unknown document `{}`", e.doc_id)))
                .and_then(|d| rerank(d, &to_candidates(&e.ranked), &texts, scorer, cfg.output_k));
            (e.doc_id.clone(), outcome)
        })
        .collect();
    let (entries, failures) = split_outcomes(outcomes, candidates.failures.clone());
    Ok(RankedRun {
        run_id: "two_stage".into(),
        stage: Stage::TwoStage,
        entries,
        failures,
    })
}

/// Everything one end-to-end pass produces.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Untruncated stage-1 candidate sets.
    pub candidates: RankedRun,
    /// Stage-1 lists cut to `output_k`.
    pub stage1: RankedRun,
    pub two_stage: RankedRun,
}

impl PipelineOutput {
    pub fn failed_documents(&self) -> usize {
        self.two_stage.failures.len()
    }
}

pub fn run_pipeline(
    corpus: &Corpus,
    doc_vectors: &EmbeddingMatrix,
    subject_vectors: &EmbeddingMatrix,
    forest: &RPForest,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let scorer = cfg.scorer.build(&corpus.documents)?;
    run_pipeline_with(
        corpus,
        doc_vectors,
        subject_vectors,
        forest,
        cfg,
        scorer.as_ref(),
    )
}

/// [`run_pipeline`] with a caller-supplied scorer.
pub fn run_pipeline_with(
    corpus: &Corpus,
    doc_vectors: &EmbeddingMatrix,
    subject_vectors: &EmbeddingMatrix,
    forest: &RPForest,
    cfg: &PipelineConfig,
    scorer: &dyn PairScorer,
) -> Result<PipelineOutput> {
    let index = forest.searcher(subject_vectors)?;
    let candidates = retrieve_run(&corpus.documents, doc_vectors, &index, cfg)?;
    let stage1 = candidates.truncated(cfg.output_k, "stage1");
    let two_stage = rerank_run(corpus, &candidates, scorer, cfg)?;
    Ok(PipelineOutput {
        candidates,
        stage1,
        two_stage,
    })
}
