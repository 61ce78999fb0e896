//! Hash-embeds a few titles with the document and subject prompts, prints
//! their cosine similarities and round-trips the matrix through an `.emb` file.
//!
//! Run: `cargo run -p subjtag --example embed_texts -- [DIM] [SEED]`

use subjtag::embedding::{
    dot, embed_corpus, load_matrix, save_matrix, EmbedderConfig, PromptConfig, Role,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dim: usize = args.next().map_or(Ok(256), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(7), |s| s.parse())?;
    let cfg = EmbedderConfig::hash(dim, seed);
    let prompts = PromptConfig::default();

    let docs = vec![
        (
            "d1".to_owned(),
            "Erdbebensicherheit von Kernkraftwerken\nearthquake resistant construction".to_owned(),
        ),
        (
            "d2".to_owned(),
            "Einführung in die Lineare Algebra\nvector spaces and matrices".to_owned(),
        ),
    ];
    let subjects = vec![
        (
            "s1".to_owned(),
            "Erdbebensicherheit\nearthquake engineering".to_owned(),
        ),
        ("s2".to_owned(), "Lineare Algebra".to_owned()),
        ("s3".to_owned(), "Kirchengeschichte".to_owned()),
    ];
    let d = embed_corpus(&cfg, &docs, Role::Document, &prompts)?;
    let s = embed_corpus(&cfg, &subjects, Role::Subject, &prompts)?;

    println!("document prompt: {:?}", prompts.document_prompt);
    println!("subject prompt:  {:?}\n", prompts.subject_prompt);
    print!("{:>6}", "");
    for id in s.ids() {
        print!("{id:>8}");
    }
    println!();
    for (id, row) in d.ids().iter().zip(d.rows()) {
        print!("{id:>6}");
        for col in s.rows() {
            print!("{:>8.3}", dot(row, col));
        }
        println!();
    }

    let path = std::env::temp_dir().join("embed_texts_example.emb");
    save_matrix(&s, &path)?;
    let back = load_matrix(&path)?;
    println!(
        "\n{} rows x {} dims -> {} ({} bytes), reload equal: {}",
        s.len(),
        s.dim(),
        path.display(),
        std::fs::metadata(&path)?.len(),
        back == s
    );
    std::fs::remove_file(&path)?;
    Ok(())
}
