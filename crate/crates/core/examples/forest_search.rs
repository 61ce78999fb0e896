//! Builds a random-projection forest over synthetic subject vectors and shows
//! how `n_trees` and `search_k` trade speed for agreement with exact search.
//!
//! Run: `cargo run --release -p subjtag --example forest_search -- [N_ITEMS] [DIM]`

use std::collections::HashSet;
use std::time::Instant;

use subjtag::ann::{exact_topk, IndexConfig, RPForest};
use subjtag::embedding::{embed_corpus, EmbedderConfig, PromptConfig, Role};
use subjtag::synth::random_texts;

const K: usize = 10;
const N_QUERIES: usize = 100;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(5000), |s| s.parse())?;
    let dim: usize = args.next().map_or(Ok(64), |s| s.parse())?;
    let cfg = EmbedderConfig::hash(dim, 7);
    let prompts = PromptConfig::default();
    let items = embed_corpus(&cfg, &random_texts(n, 6, 7), Role::Subject, &prompts)?;
    let queries = embed_corpus(
        &cfg,
        &random_texts(N_QUERIES, 6, 99),
        Role::Document,
        &prompts,
    )?;

    let exact: Vec<HashSet<String>> = queries
        .rows()
        .map(|q| exact_topk(&items, q, K).map(|c| c.into_iter().map(|c| c.subject_code).collect()))
        .collect::<Result<_, _>>()?;

    println!("{n} items, dim {dim}, {N_QUERIES} queries, top-{K} overlap with exact search\n");
    println!(
        "{:>7}  {:>9}  {:>8}  {:>8}  {:>9}",
        "n_trees", "search_k", "build s", "query ms", "overlap"
    );
    for n_trees in [10, 50, 100] {
        let t = Instant::now();
        let forest = RPForest::build(
            &items,
            &IndexConfig {
                n_trees,
                ..Default::default()
            },
        )?;
        let build = t.elapsed().as_secs_f64();
        let index = forest.searcher(&items)?;
        for search_k in [100, 1_000, 10_000, 50_000] {
            let t = Instant::now();
            let mut hits = 0;
            for (q, want) in queries.rows().zip(&exact) {
                hits += index
                    .query(q, K, search_k)?
                    .iter()
                    .filter(|c| want.contains(&c.subject_code))
                    .count();
            }
            let per_query = t.elapsed().as_secs_f64() * 1e3 / N_QUERIES as f64;
            println!(
                "{n_trees:>7}  {search_k:>9}  {build:>8.2}  {per_query:>8.3}  {:>9.3}",
                hits as f64 / (K * N_QUERIES) as f64
            );
        }
    }
    Ok(())
}
