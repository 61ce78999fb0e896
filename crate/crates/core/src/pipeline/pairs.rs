//! Labeled `(document, subject)` pairs for training a pair classifier:
//! every gold link is a positive, negatives are subjects drawn uniformly from
//! outside the document's gold set.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{render_document_text, render_subject_text, Document, Subject};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub doc_id: String,
    pub subject_code: String,
    pub doc_text: String,
    pub subject_text: String,
    pub label: u8,
}

/// One positive per `(doc, gold subject)`, each followed by
/// `negatives_per_positive` negatives. Negatives are drawn without
/// replacement within a document. Documents without gold labels contribute
/// nothing.
pub fn generate_training_pairs(
    docs: &[Document],
    subjects: &[Subject],
    negatives_per_positive: usize,
    seed: u64,
) -> Result<Vec<LabeledPair>> {
    if negatives_per_positive == 0 {
        return Err(Error::input("negatives_per_positive must be positive"));
    }
    let subject_texts: Vec<String> = subjects.iter().map(render_subject_text).collect();
    let position = |code: &str| subjects.iter().position(|s| s.code == code);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    for doc in docs {
        let mut gold: Vec<usize> = Vec::new();
        for code in &doc.gold_subjects {
            let idx = position(code).ok_or_else(|| {
                Error::input(format!(
                    "document `{}` references unknown subject `{code}`",
                    doc.id
                ))
            })?;
            if !gold.contains(&idx) {
                gold.push(idx);
            }
        }
        if gold.is_empty() {
            continue;
        }
        let gold_set: HashSet<usize> = gold.iter().copied().collect();
        let pool: Vec<usize> = (0..subjects.len())
            .filter(|i| !gold_set.contains(i))
            .collect();
        let wanted = negatives_per_positive * gold.len();
        if wanted > pool.len() {
            return Err(Error::input(format!(
                "document `{}` needs {wanted} negatives but only {} non-gold subjects exist",
                doc.id,
                pool.len()
            )));
        }
        let negatives = sample(&mut rng, pool.len(), wanted).into_vec();
        let doc_text = render_document_text(doc);
        let make = |idx: usize, label: u8| LabeledPair {
            doc_id: doc.id.clone(),
            subject_code: subjects[idx].code.clone(),
            doc_text: doc_text.clone(),
            subject_text: subject_texts[idx].clone(),
            label,
        };
        for (p, &pos) in gold.iter().enumerate() {
            out.push(make(pos, 1));
            let chunk = &negatives[p * negatives_per_positive..(p + 1) * negatives_per_positive];
            out.extend(chunk.iter().map(|&n| make(pool[n], 0)));
        }
    }
    Ok(out)
}

pub fn pairs_to_jsonl(pairs: &[LabeledPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&serde_json::to_string(p).expect("pairs serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_pairs(input: &str) -> Result<Vec<LabeledPair>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let p: LabeledPair = serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if p.label > 1 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("label must be 0 or 1, got {}", p.label),
                });
            }
            Ok(p)
        })
        .collect()
}
