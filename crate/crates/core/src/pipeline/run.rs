//! Run files: one JSON line per document plus a `*.summary.json` sidecar.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Stage1,
    TwoStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub subject: String,
    pub score: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub doc_id: String,
    pub ranked: Vec<RankedItem>,
}

impl RunEntry {
    pub fn codes(&self) -> impl Iterator<Item = &str> + '_ {
        self.ranked.iter().map(|r| r.subject.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub doc_id: String,
    pub error: String,
}

/// Ranked lists for one pipeline configuration. Documents that failed are
/// absent from `entries` and listed in `failures`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRun {
    pub run_id: String,
    pub stage: Stage,
    pub entries: Vec<RunEntry>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub stage: Stage,
    pub n_docs: usize,
    pub failures: Vec<Failure>,
}

impl RankedRun {
    pub fn entry(&self, doc_id: &str) -> Option<&RunEntry> {
        self.entries.iter().find(|e| e.doc_id == doc_id)
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            run_id: self.run_id.clone(),
            stage: self.stage,
            n_docs: self.entries.len(),
            failures: self.failures.clone(),
        }
    }

    /// Copy with every list cut to `k` items.
    pub fn truncated(&self, k: usize, run_id: impl Into<String>) -> RankedRun {
        RankedRun {
            run_id: run_id.into(),
            stage: self.stage,
            entries: self
                .entries
                .iter()
                .map(|e| RunEntry {
                    doc_id: e.doc_id.clone(),
                    ranked: e.ranked.iter().take(k).cloned().collect(),
                })
                .collect(),
            failures: self.failures.clone(),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("run entries serialize"));
            out.push('\n');
        }
        out
    }

    /// Writes the run file and its summary sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))?;
        let sidecar = summary_path(path);
        let mut summary =
            serde_json::to_string_pretty(&self.summary()).expect("summary serializes");
        summary.push('\n');
        std::fs::write(&sidecar, summary).map_err(|e| Error::io(&sidecar, e))
    }

    /// Reads a run file and its sidecar.
    pub fn load(path: &Path) -> Result<RankedRun> {
        let text = crate::corpus::read_utf8(path)?;
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("{}: {e}", path.display()),
                })
            })
            .collect::<Result<Vec<RunEntry>>>()?;
        let sidecar = summary_path(path);
        let summary: RunSummary = serde_json::from_str(&crate::corpus::read_utf8(&sidecar)?)
            .map_err(|e| Error::Parse {
                line: e.line(),
                message: format!("{}: {e}", sidecar.display()),
            })?;
        if summary.n_docs != entries.len() {
            return Err(Error::input(format!(
                "{}: summary says {} documents, run file has {}",
                path.display(),
                summary.n_docs,
                entries.len()
            )));
        }
        Ok(RankedRun {
            run_id: summary.run_id,
            stage: summary.stage,
            entries,
            failures: summary.failures,
        })
    }
}

/// `stage1.jsonl` -> `stage1.summary.json`.
pub fn summary_path(run_path: &Path) -> PathBuf {
    run_path.with_extension("summary.json")
}
