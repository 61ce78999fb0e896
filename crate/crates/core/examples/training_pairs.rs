//! Generates labeled (document, subject) pairs for fine-tuning a pair scorer:
//! one positive per gold link, each followed by sampled negatives.
//!
//! Run: `cargo run -p subjtag --example training_pairs -- [NEGATIVES_PER_POSITIVE] [OUT_FILE]`

use std::path::PathBuf;

use subjtag::corpus::Corpus;
use subjtag::pipeline::{generate_training_pairs, pairs_to_jsonl, parse_pairs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let negatives: usize = args.next().map_or(Ok(1), |s| s.parse())?;
    let out = args.next().map(PathBuf::from);

    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic");
    let corpus = Corpus::load(&data.join("docs.jsonl"), &data.join("subjects.jsonl"))?;
    let pairs = generate_training_pairs(&corpus.documents, &corpus.subjects, negatives, 7)?;

    let positives = pairs.iter().filter(|p| p.label == 1).count();
    println!(
        "{} pairs: {positives} positive, {} negative",
        pairs.len(),
        pairs.len() - positives
    );
    for p in pairs.iter().take(1 + negatives) {
        let first_line = p.subject_text.lines().next().unwrap_or_default();
        println!(
            "  {} {} label={} subject: {first_line}",
            p.doc_id, p.subject_code, p.label
        );
    }

    let jsonl = pairs_to_jsonl(&pairs);
    assert_eq!(parse_pairs(&jsonl)?, pairs);
    if let Some(path) = out {
        std::fs::write(&path, jsonl)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
