//! Average recall@k over ranked runs, and side-by-side run comparison.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::pipeline::RankedRun;

/// 5, 10, ..., 50.
pub fn default_cutoffs() -> Vec<usize> {
    (1..=10).map(|i| i * 5).collect()
}

/// `|top-k(ranked) ∩ gold| / |gold|`.
pub fn recall_at_k<S: AsRef<str>>(ranked: &[S], gold: &HashSet<&str>, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if gold.is_empty() {
        return Err(Error::input("recall is undefined for an empty gold set"));
    }
    let mut seen = HashSet::new();
    let hits = ranked
        .iter()
        .take(k)
        .map(AsRef::as_ref)
        .filter(|c| gold.contains(c) && seen.insert(*c))
        .count();
    Ok(hits as f64 / gold.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run_id: String,
    pub cutoffs: Vec<usize>,
    pub avg_recall: BTreeMap<usize, f64>,
    pub n_docs_evaluated: usize,
    pub n_docs_skipped: usize,
}

impl EvalReport {
    pub fn recall(&self, k: usize) -> Option<f64> {
        self.avg_recall.get(&k).copied()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:>11}  {:>10}\n", "Recall at k", self.run_id);
        for k in &self.cutoffs {
            let _ = writeln!(out, "{k:>11}  {:>10.4}", self.avg_recall[k]);
        }
        let _ = writeln!(
            out,
            "({} documents evaluated, {} skipped without gold)",
            self.n_docs_evaluated, self.n_docs_skipped
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn normalize_cutoffs(cutoffs: &[usize]) -> Result<Vec<usize>> {
    if cutoffs.is_empty() || cutoffs.contains(&0) {
        return Err(Error::input(
            "cutoffs must be a non-empty list of positive k",
        ));
    }
    let mut c = cutoffs.to_vec();
    c.sort_unstable();
    c.dedup();
    Ok(c)
}

/// Unweighted mean recall per cutoff over the run's documents that have gold
/// labels. Documents without gold are counted as skipped.
pub fn evaluate_run(
    run: &RankedRun,
    documents: &[Document],
    cutoffs: &[usize],
) -> Result<EvalReport> {
    let cutoffs = normalize_cutoffs(cutoffs)?;
    let by_id: HashMap<&str, &Document> = documents.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut sums = vec![0.0f64; cutoffs.len()];
    let mut evaluated = 0;
    let mut skipped = 0;
    for entry in &run.entries {
        let doc = by_id.get(entry.doc_id.as_str()).ok_or_else(|| {
            Error::input(format!(
                "run `{}` references unknown document `{}`",
                run.run_id, entry.doc_id
            ))
        })?;
        let gold: HashSet<&str> = doc.gold_subjects.iter().map(String::as_str).collect();
        if gold.is_empty() {
            skipped += 1;
            continue;
        }
        let ranked: Vec<&str> = entry.codes().collect();
        for (sum, &k) in sums.iter_mut().zip(&cutoffs) {
            *sum += recall_at_k(&ranked, &gold, k)?;
        }
        evaluated += 1;
    }
    let avg_recall = cutoffs
        .iter()
        .zip(&sums)
        .map(|(&k, &s)| {
            (
                k,
                if evaluated == 0 {
                    0.0
                } else {
                    s / evaluated as f64
                },
            )
        })
        .collect();
    Ok(EvalReport {
        run_id: run.run_id.clone(),
        cutoffs,
        avg_recall,
        n_docs_evaluated: evaluated,
        n_docs_skipped: skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub abs_delta: f64,
    /// `(b - a) / a`; absent when `a` is zero.
    pub rel_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub run_a: String,
    pub run_b: String,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, k: usize) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn to_text(&self) -> String {
        let wa = self.run_a.len().max(8);
        let wb = self.run_b.len().max(8);
        let mut out = format!(
            "{:>11}  {:>wa$}  {:>wb$}  {:>9}  {:>9}\n",
            "Recall at k", self.run_a, self.run_b, "abs delta", "rel delta"
        );
        for r in &self.rows {
            let rel = r
                .rel_delta
                .map_or_else(|| "n/a".to_owned(), |d| format!("{:+.1}%", d * 100.0));
            let _ = writeln!(
                out,
                "{:>11}  {:>wa$.4}  {:>wb$.4}  {:>+9.4}  {:>9}",
                r.k, r.a, r.b, r.abs_delta, rel
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }
}

/// Per-cutoff values of both reports with `b - a` and `(b - a) / a`.
pub fn compare_runs(a: &EvalReport, b: &EvalReport) -> Result<Comparison> {
    if a.cutoffs != b.cutoffs {
        return Err(Error::input(format!(
            "cutoff grids differ: {:?} vs {:?}",
            a.cutoffs, b.cutoffs
        )));
    }
    let rows = a
        .cutoffs
        .iter()
        .map(|&k| {
            let (va, vb) = (a.avg_recall[&k], b.avg_recall[&k]);
            ComparisonRow {
                k,
                a: va,
                b: vb,
                abs_delta: vb - va,
                rel_delta: (va != 0.0).then(|| (vb - va) / va),
            }
        })
        .collect();
    Ok(Comparison {
        run_a: a.run_id.clone(),
        run_b: b.run_id.clone(),
        rows,
    })
}
