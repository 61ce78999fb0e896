//! Stage-1 forest retrieval versus two-stage re-ranking on the bundled
//! corpus, with Gaussian noise on the document vectors so that retrieval
//! alone is weak. Prints a recall-at-k comparison table.
//!
//! Run: `cargo run --release -p subjtag --example two_stage -- [SCORER] [SIGMA]`
//!
//! SCORER is one of `lexical` (default), `passthrough`, `oracle`.

use std::path::PathBuf;

use subjtag::ann::{IndexConfig, RPForest};
use subjtag::corpus::{render_document_text, render_subject_text, Corpus};
use subjtag::embedding::{embed_corpus, EmbedderConfig, PromptConfig, Role};
use subjtag::eval::{compare_runs, default_cutoffs, evaluate_run};
use subjtag::pipeline::{run_pipeline, PipelineConfig, ScorerConfig, ScorerKind};
use subjtag::synth::perturb;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        None | Some("lexical") => ScorerKind::Lexical,
        Some("passthrough") => ScorerKind::Passthrough,
        Some("oracle") => ScorerKind::Oracle,
        Some(other) => return Err(format!("unknown scorer `{other}`").into()),
    };
    let sigma: f32 = args.next().map_or(Ok(0.05), |s| s.parse())?;

    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic");
    let corpus = Corpus::load(&data.join("docs.jsonl"), &data.join("subjects.jsonl"))?;
    let cfg = EmbedderConfig::default();
    let prompts = PromptConfig::default();
    let doc_texts: Vec<_> = corpus
        .documents
        .iter()
        .map(|d| (d.id.clone(), render_document_text(d)))
        .collect();
    let subject_texts: Vec<_> = corpus
        .subjects
        .iter()
        .map(|s| (s.code.clone(), render_subject_text(s)))
        .collect();
    let docs = embed_corpus(&cfg, &doc_texts, Role::Document, &prompts)?;
    let docs = perturb(&docs, sigma, 11)?;
    let subjects = embed_corpus(&cfg, &subject_texts, Role::Subject, &prompts)?;
    let forest = RPForest::build(&subjects, &IndexConfig::default())?;

    let pipeline = PipelineConfig {
        scorer: ScorerConfig::of(kind),
        ..Default::default()
    };
    let out = run_pipeline(&corpus, &docs, &subjects, &forest, &pipeline)?;
    let cutoffs = default_cutoffs();
    let ceiling = evaluate_run(&out.candidates, &corpus.documents, &[pipeline.n_candidates])?;
    let cmp = compare_runs(
        &evaluate_run(&out.stage1, &corpus.documents, &cutoffs)?,
        &evaluate_run(&out.two_stage, &corpus.documents, &cutoffs)?,
    )?;

    println!(
        "{} documents, {} subjects, noise sigma {sigma}, scorer {kind:?}\n",
        corpus.documents.len(),
        corpus.subjects.len()
    );
    print!("{}", cmp.to_text());
    println!(
        "\ncandidate-set recall at N={}: {:.4}",
        pipeline.n_candidates,
        ceiling.recall(pipeline.n_candidates).unwrap_or(0.0)
    );
    Ok(())
}
