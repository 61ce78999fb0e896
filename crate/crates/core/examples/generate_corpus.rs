//! Writes a seeded synthetic corpus as `docs.jsonl` + `subjects.jsonl`.
//!
//! Run: `cargo run -p subjtag --example generate_corpus -- [OUT_DIR] [N_DOCS] [N_SUBJECTS] [SEED]`
//!
//! With no arguments this regenerates the bundled fixture in `data/synthetic/`.

use std::path::PathBuf;

use subjtag::corpus::{documents_to_jsonl, subjects_to_jsonl};
use subjtag::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out: PathBuf = args
        .next()
        .map(Into::into)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic"));
    let defaults = SynthConfig::default();
    let cfg = SynthConfig {
        n_documents: args
            .next()
            .map_or(Ok(defaults.n_documents), |s| s.parse())?,
        n_subjects: args.next().map_or(Ok(defaults.n_subjects), |s| s.parse())?,
        seed: args.next().map_or(Ok(defaults.seed), |s| s.parse())?,
        ..defaults
    };

    let corpus = generate(&cfg);
    std::fs::create_dir_all(&out)?;
    std::fs::write(
        out.join("docs.jsonl"),
        documents_to_jsonl(&corpus.documents),
    )?;
    std::fs::write(
        out.join("subjects.jsonl"),
        subjects_to_jsonl(&corpus.subjects),
    )?;

    let links: usize = corpus.documents.iter().map(|d| d.gold_subjects.len()).sum();
    println!(
        "{} documents ({links} gold links), {} subjects -> {}",
        corpus.documents.len(),
        corpus.subjects.len(),
        out.display()
    );
    println!("sample document: {:?}", corpus.documents[0]);
    println!("sample subject:  {:?}", corpus.subjects[0]);
    Ok(())
}
