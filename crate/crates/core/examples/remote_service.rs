//! Talks to a model service over HTTP: embeds two texts through `/embed` and
//! scores a document against two subjects through `/score`.
//!
//! Run: `cargo run -p subjtag --example remote_service -- http://127.0.0.1:8000`

use std::time::Duration;

use subjtag::embedding::{dot, Embedder, PromptConfig, RemoteEmbedder, Role};
use subjtag::pipeline::{PairInput, PairScorer, RemoteScorer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let url = std::env::args()
        .nth(1)
        .ok_or("usage: remote_service BASE_URL")?;
    let timeout = Duration::from_secs(60);
    let prompts = PromptConfig::default();

    let embedder = RemoteEmbedder::new(&url, 64, timeout);
    let texts = [
        prompts.apply(Role::Document, "Erdbebensicherheit von Kernkraftwerken"),
        prompts.apply(Role::Document, "Einführung in die Lineare Algebra"),
    ];
    let vectors = embedder.embed(&texts, Role::Document, prompts.prompt(Role::Document))?;
    println!(
        "/embed: {} vectors of dim {}, cosine {:.3}",
        vectors.len(),
        vectors[0].len(),
        dot(&vectors[0], &vectors[1])
    );

    let doc = "Erdbebensicherheit von Kernkraftwerken\nSeismic design of reactor buildings";
    let pairs = [
        PairInput {
            doc_id: "d1",
            subject_code: "s1",
            doc_text: doc,
            subject_text: "Erdbebensicherheit",
        },
        PairInput {
            doc_id: "d1",
            subject_code: "s2",
            doc_text: doc,
            subject_text: "Kirchengeschichte",
        },
    ];
    let scores = RemoteScorer::new(&url, 64, timeout).score(&pairs)?;
    for (p, s) in pairs.iter().zip(scores) {
        println!("/score: {} -> {s:.3}", p.subject_text);
    }
    Ok(())
}
