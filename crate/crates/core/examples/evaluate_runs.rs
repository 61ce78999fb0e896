//! Evaluates saved run files and compares two of them.
//!
//! Run: `cargo run -p subjtag --example evaluate_runs -- DOCS.jsonl RUN_A.jsonl RUN_B.jsonl`
//!
//! The run files are what `subjtag retrieve` / `subjtag rerank` write, e.g.
//! `out/stage1.jsonl` and `out/two_stage.jsonl`. Each needs its
//! `.summary.json` sidecar next to it.

use std::path::Path;

use subjtag::corpus::parse_documents;
use subjtag::eval::{compare_runs, default_cutoffs, evaluate_run};
use subjtag::pipeline::RankedRun;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [docs, a, b] = args.as_slice() else {
        return Err("usage: evaluate_runs DOCS.jsonl RUN_A.jsonl RUN_B.jsonl".into());
    };
    let documents = parse_documents(&std::fs::read_to_string(docs)?)?;
    let cutoffs = default_cutoffs();
    let ra = evaluate_run(&RankedRun::load(Path::new(a))?, &documents, &cutoffs)?;
    let rb = evaluate_run(&RankedRun::load(Path::new(b))?, &documents, &cutoffs)?;

    print!("{}\n{}\n", ra.to_text(), rb.to_text());
    print!("{}", compare_runs(&ra, &rb)?.to_text());
    Ok(())
}
