//! Seeded synthetic corpora for demos and tests.
//!
//! Subjects get a handful of pseudo-word "topic terms"; a document's title and
//! abstract are built from the terms of its gold subjects mixed with filler
//! words, so lexical overlap carries the gold signal.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::{Corpus, Document, Subject};
use crate::embedding::{normalize, EmbeddingMatrix};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub n_documents: usize,
    pub terms_per_subject: usize,
    pub max_gold: usize,
    /// Fraction of subjects that get a definition.
    pub definition_rate: f64,
    pub filler_words: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_subjects: 1000,
            n_documents: 200,
            terms_per_subject: 5,
            max_gold: 4,
            definition_rate: 0.7,
            filler_words: 14,
            seed: 7,
        }
    }
}

const ONSETS: &[&str] = &[
    "b", "br", "ch", "d", "dr", "f", "fl", "g", "gr", "h", "k", "kl", "l", "m", "n", "p", "pf",
    "pr", "r", "s", "sch", "sp", "st", "t", "tr", "v", "w", "z",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ei", "au", "ie", "ä", "ö", "ü"];
const CODAS: &[&str] = &["", "", "n", "r", "l", "s", "t", "ng", "ck", "m", "ft", "rz"];

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).expect("non-empty"));
        w.push_str(NUCLEI.choose(rng).expect("non-empty"));
        w.push_str(CODAS.choose(rng).expect("non-empty"));
    }
    w
}

fn vocabulary(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = pseudo_word(rng);
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub fn generate(cfg: &SynthConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let topic_vocab = vocabulary(
        &mut rng,
        (cfg.n_subjects * cfg.terms_per_subject / 2).max(50),
    );
    let filler_vocab = vocabulary(&mut rng, 400);

    let mut terms = Vec::with_capacity(cfg.n_subjects);
    let subjects: Vec<Subject> = (0..cfg.n_subjects)
        .map(|i| {
            let t: Vec<String> = topic_vocab
                .choose_multiple(&mut rng, cfg.terms_per_subject)
                .cloned()
                .collect();
            let name = t[..2]
                .iter()
                .map(|w| capitalize(w))
                .collect::<Vec<_>>()
                .join(" ");
            let definition = rng.random_bool(cfg.definition_rate).then(|| {
                let mut words: Vec<&str> = t[2..].iter().map(String::as_str).collect();
                words.extend(
                    filler_vocab
                        .choose_multiple(&mut rng, 3)
                        .map(String::as_str),
                );
                words.shuffle(&mut rng);
                words.join(" ")
            });
            terms.push(t);
            Subject {
                code: format!("gnd{i:05}"),
                name,
                definition,
            }
        })
        .collect();

    let documents = (0..cfg.n_documents)
        .map(|i| {
            let n_gold = rng.random_range(1..=cfg.max_gold.max(1));
            let gold: Vec<usize> =
                rand::seq::index::sample(&mut rng, cfg.n_subjects, n_gold.min(cfg.n_subjects))
                    .into_vec();
            let mut title: Vec<String> = gold.iter().map(|&g| capitalize(&terms[g][0])).collect();
            title.push(filler_vocab.choose(&mut rng).expect("non-empty").clone());
            let mut body: Vec<&str> = Vec::new();
            for &g in &gold {
                body.extend(terms[g].choose_multiple(&mut rng, 3).map(String::as_str));
            }
            body.extend(
                filler_vocab
                    .choose_multiple(&mut rng, cfg.filler_words)
                    .map(String::as_str),
            );
            body.shuffle(&mut rng);
            Document {
                id: format!("doc{i:04}"),
                title: title.join(" "),
                abstract_text: body.join(" "),
                language: if i % 2 == 0 { "de" } else { "en" }.into(),
                gold_subjects: gold.iter().map(|&g| subjects[g].code.clone()).collect(),
            }
        })
        .collect();

    Corpus {
        documents,
        subjects,
    }
}

/// Adds i.i.d. Gaussian noise with standard deviation `sigma` to every
/// coordinate and re-normalizes.
pub fn perturb(m: &EmbeddingMatrix, sigma: f32, seed: u64) -> Result<EmbeddingMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = m
        .rows()
        .map(|r| {
            let mut v: Vec<f32> = r
                .iter()
                .map(|&x| x + sigma * rng.sample::<f32, _>(StandardNormal))
                .collect();
            if !normalize(&mut v) {
                v = r.to_vec();
            }
            v
        })
        .collect();
    EmbeddingMatrix::from_rows(m.ids().to_vec(), rows)
}

/// `n` texts of `words` pseudo-words each, for index benchmarks.
pub fn random_texts(n: usize, words: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary(&mut rng, 3000);
    (0..n)
        .map(|i| {
            let text = vocab
                .choose_multiple(&mut rng, words)
                .cloned()
                .collect::<Vec<_>>()
                .join(" ");
            (format!("t{i:05}"), text)
        })
        .collect()
}
