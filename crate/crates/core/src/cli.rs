//! Command-line workflow: `embed -> index -> retrieve -> rerank -> eval`,
//! plus `gen-pairs` for scorer training data.
//!
//! Configuration comes from an optional JSON file (`--config`) with flags
//! applied on top. All artifacts live in the output directory under fixed
//! names (see [`Artifacts`]).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::ann::{load_forest, save_forest, IndexConfig, RPForest};
use crate::corpus::{render_document_text, render_subject_text, Corpus};
use crate::embedding::{
    embed_corpus, load_matrix, save_matrix, EmbedderConfig, EmbedderKind, PromptConfig, Role,
};
use crate::error::{Error, Result};
use crate::eval::{compare_runs, default_cutoffs, evaluate_run};
use crate::pipeline::{
    generate_training_pairs, pairs_to_jsonl, rerank_run, retrieve_run, PipelineConfig, RankedRun,
    ScorerKind,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub docs: PathBuf,
    pub subjects: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub embedder: EmbedderConfig,
    pub prompts: PromptConfig,
    pub index: IndexConfig,
    pub pipeline: PipelineConfig,
    pub cutoffs: Vec<usize>,
    pub negatives_per_positive: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            docs: "docs.jsonl".into(),
            subjects: "subjects.jsonl".into(),
            out_dir: "out".into(),
            seed: 7,
            embedder: EmbedderConfig::default(),
            prompts: PromptConfig::default(),
            index: IndexConfig::default(),
            pipeline: PipelineConfig::default(),
            cutoffs: default_cutoffs(),
            negatives_per_positive: 1,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = crate::corpus::read_utf8(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })
    }

    /// Sets the global seed and every component seed derived from it.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.embedder.seed = seed;
        self.index.seed = seed;
    }

    pub fn artifacts(&self) -> Artifacts {
        Artifacts::new(&self.out_dir)
    }
}

/// Fixed artifact names inside the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub doc_matrix: PathBuf,
    pub subject_matrix: PathBuf,
    pub forest: PathBuf,
    pub candidates: PathBuf,
    pub stage1: PathBuf,
    pub two_stage: PathBuf,
    pub pairs: PathBuf,
    dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Artifacts {
            doc_matrix: dir.join("documents.emb"),
            subject_matrix: dir.join("subjects.emb"),
            forest: dir.join("subjects.rpf"),
            candidates: dir.join("candidates.jsonl"),
            stage1: dir.join("stage1.jsonl"),
            two_stage: dir.join("two_stage.jsonl"),
            pairs: dir.join("pairs.jsonl"),
            dir: dir.to_path_buf(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// An existing path is used as-is; otherwise `name` is a run in the
    /// output directory (`stage1` -> `<out>/stage1.jsonl`).
    pub fn run_path(&self, name: &str) -> PathBuf {
        let p = Path::new(name);
        if p.exists() {
            p.to_path_buf()
        } else {
            self.dir.join(format!("{name}.jsonl"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "subjtag", version, about = "Two-stage subject tagging")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for all artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub docs: Option<PathBuf>,
    #[arg(long, global = true)]
    pub subjects: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub embedder: Option<EmbedderChoice>,
    #[arg(long, global = true, value_enum)]
    pub scorer: Option<ScorerChoice>,
    /// Model service base URL for remote embedder and scorer.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub n_trees: Option<usize>,
    #[arg(long, global = true)]
    pub search_k: Option<usize>,
    #[arg(long, global = true)]
    pub n_candidates: Option<usize>,
    #[arg(long, global = true)]
    pub output_k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedderChoice {
    Hash,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScorerChoice {
    Passthrough,
    Lexical,
    Remote,
    Oracle,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Embed documents and subjects into `.emb` files.
    Embed,
    /// Build the subject forest.
    Index,
    /// Stage 1: candidate and stage-1 runs.
    Retrieve,
    /// Stage 2: re-rank the candidate run.
    Rerank,
    /// Write labeled training pairs.
    GenPairs {
        #[arg(long)]
        negatives_per_positive: Option<usize>,
    },
    /// Average recall@k for runs, or a comparison of two runs.
    Eval {
        /// Runs to evaluate (names in the output directory or paths).
        runs: Vec<String>,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

impl CommonArgs {
    /// Loads the config file (or defaults) and applies flag overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(p) = &self.docs {
            cfg.docs = p.clone();
        }
        if let Some(p) = &self.subjects {
            cfg.subjects = p.clone();
        }
        if let Some(e) = self.embedder {
            cfg.embedder.kind = match e {
                EmbedderChoice::Hash => EmbedderKind::Hash,
                EmbedderChoice::Remote => EmbedderKind::Remote,
            };
        }
        if let Some(s) = self.scorer {
            cfg.pipeline.scorer.kind = match s {
                ScorerChoice::Passthrough => ScorerKind::Passthrough,
                ScorerChoice::Lexical => ScorerKind::Lexical,
                ScorerChoice::Remote => ScorerKind::Remote,
                ScorerChoice::Oracle => ScorerKind::Oracle,
            };
        }
        if let Some(url) = &self.endpoint {
            cfg.embedder.endpoint = Some(url.clone());
            cfg.pipeline.scorer.endpoint = Some(url.clone());
        }
        if let Some(d) = self.dim {
            cfg.embedder.dim = d;
        }
        if let Some(n) = self.n_trees {
            cfg.index.n_trees = n;
        }
        if let Some(n) = self.search_k {
            cfg.pipeline.search_k = n;
        }
        if let Some(n) = self.n_candidates {
            cfg.pipeline.n_candidates = n;
        }
        if let Some(n) = self.output_k {
            cfg.pipeline.output_k = n;
        }
        Ok(cfg)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load_valid_corpus(cfg: &RunConfig) -> Result<Corpus> {
    let corpus = Corpus::load(&cfg.docs, &cfg.subjects)?;
    let report = corpus.validate();
    if !report.is_valid() {
        return Err(Error::Validation(report.to_string()));
    }
    Ok(corpus)
}

fn failures_error(run: &RankedRun) -> Result<()> {
    match run.failures.first() {
        None => Ok(()),
        Some(f) => Err(Error::Input(format!(
            "{} document(s) failed in run `{}`; first: `{}`: {}",
            run.failures.len(),
            run.run_id,
            f.doc_id,
            f.error
        ))),
    }
}

pub fn cmd_embed(cfg: &RunConfig) -> Result<String> {
    let corpus = load_valid_corpus(cfg)?;
    let art = cfg.artifacts();
    ensure_dir(art.dir())?;
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
    let docs = embed_corpus(&cfg.embedder, &doc_texts, Role::Document, &cfg.prompts)?;
    let subjects = embed_corpus(&cfg.embedder, &subject_texts, Role::Subject, &cfg.prompts)?;
    save_matrix(&docs, &art.doc_matrix)?;
    save_matrix(&subjects, &art.subject_matrix)?;
    Ok(format!(
        "embedded {} documents and {} subjects at dim {}",
        docs.len(),
        subjects.len(),
        docs.dim()
    ))
}

pub fn cmd_index(cfg: &RunConfig) -> Result<String> {
    let art = cfg.artifacts();
    let subjects = load_matrix(&art.subject_matrix)?;
    let forest = RPForest::build(&subjects, &cfg.index)?;
    save_forest(&forest, &art.forest)?;
    Ok(format!(
        "indexed {} subjects in {} trees (leaf_size {})",
        forest.len(),
        cfg.index.n_trees,
        cfg.index.leaf_size
    ))
}

pub fn cmd_retrieve(cfg: &RunConfig) -> Result<String> {
    let corpus = load_valid_corpus(cfg)?;
    let art = cfg.artifacts();
    let docs = load_matrix(&art.doc_matrix)?;
    let subjects = load_matrix(&art.subject_matrix)?;
    let forest = load_forest(&art.forest)?;
    let index = forest.searcher(&subjects)?;
    let candidates = retrieve_run(&corpus.documents, &docs, &index, &cfg.pipeline)?;
    let stage1 = candidates.truncated(cfg.pipeline.output_k, "stage1");
    candidates.save(&art.candidates)?;
    stage1.save(&art.stage1)?;
    failures_error(&candidates)?;
    Ok(format!(
        "retrieved up to {} candidates for {} documents (search_k {})",
        cfg.pipeline.n_candidates,
        candidates.entries.len(),
        cfg.pipeline.search_k
    ))
}

pub fn cmd_rerank(cfg: &RunConfig) -> Result<String> {
    let corpus = load_valid_corpus(cfg)?;
    let art = cfg.artifacts();
    let candidates = RankedRun::load(&art.candidates)?;
    let scorer = cfg.pipeline.scorer.build(&corpus.documents)?;
    let two_stage = rerank_run(&corpus, &candidates, scorer.as_ref(), &cfg.pipeline)?;
    two_stage.save(&art.two_stage)?;
    failures_error(&two_stage)?;
    Ok(format!(
        "re-ranked {} documents with the {:?} scorer, keeping top {}",
        two_stage.entries.len(),
        cfg.pipeline.scorer.kind,
        cfg.pipeline.output_k
    ))
}

pub fn cmd_genpairs(cfg: &RunConfig) -> Result<String> {
    let corpus = load_valid_corpus(cfg)?;
    let art = cfg.artifacts();
    ensure_dir(art.dir())?;
    let pairs = generate_training_pairs(
        &corpus.documents,
        &corpus.subjects,
        cfg.negatives_per_positive,
        cfg.seed,
    )?;
    std::fs::write(&art.pairs, pairs_to_jsonl(&pairs)).map_err(|e| Error::io(&art.pairs, e))?;
    let positives = pairs.iter().filter(|p| p.label == 1).count();
    Ok(format!(
        "wrote {} pairs ({positives} positive, {} negative)",
        pairs.len(),
        pairs.len() - positives
    ))
}

/// Evaluates `runs` (default: `stage1`, `two_stage`) or compares two runs.
/// Returns the rendered output; it is also written next to the runs.
pub fn cmd_eval(
    cfg: &RunConfig,
    runs: &[String],
    compare: Option<(&str, &str)>,
    format: Format,
) -> Result<String> {
    let corpus = Corpus::load(&cfg.docs, &cfg.subjects)?;
    let art = cfg.artifacts();
    let ext = match format {
        Format::Text => "txt",
        Format::Json => "json",
    };
    let evaluate = |name: &str| -> Result<_> {
        let run = RankedRun::load(&art.run_path(name))?;
        evaluate_run(&run, &corpus.documents, &cfg.cutoffs)
    };
    let mut out = String::new();
    if let Some((a, b)) = compare {
        let cmp = compare_runs(&evaluate(a)?, &evaluate(b)?)?;
        out = match format {
            Format::Text => cmp.to_text(),
            Format::Json => cmp.to_json() + "\n",
        };
        let path = art.dir().join(format!("comparison.{ext}"));
        std::fs::write(&path, &out).map_err(|e| Error::io(&path, e))?;
    } else {
        let default_runs = ["stage1".to_owned(), "two_stage".to_owned()];
        let names = if runs.is_empty() {
            &default_runs[..]
        } else {
            runs
        };
        for name in names {
            let report = evaluate(name)?;
            let rendered = match format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json() + "\n",
            };
            let stem = Path::new(name)
                .file_stem()
                .map_or_else(|| name.clone(), |s| s.to_string_lossy().into_owned());
            let path = art.dir().join(format!("{stem}.report.{ext}"));
            std::fs::write(&path, &rendered).map_err(|e| Error::io(&path, e))?;
            out.push_str(&rendered);
        }
    }
    Ok(out)
}

/// Runs one parsed command line.
pub fn execute(cli: &Cli) -> Result<String> {
    let mut cfg = cli.common.resolve()?;
    match &cli.command {
        Command::Embed => cmd_embed(&cfg),
        Command::Index => cmd_index(&cfg),
        Command::Retrieve => cmd_retrieve(&cfg),
        Command::Rerank => cmd_rerank(&cfg),
        Command::GenPairs {
            negatives_per_positive,
        } => {
            if let Some(n) = negatives_per_positive {
                cfg.negatives_per_positive = *n;
            }
            cmd_genpairs(&cfg)
        }
        Command::Eval {
            runs,
            compare,
            format,
        } => {
            let pair = compare.as_ref().map(|v| (v[0].as_str(), v[1].as_str()));
            cmd_eval(&cfg, runs, pair, *format)
        }
    }
}

/// Entry point for the binary: prints the summary or the error and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            if !summary.ends_with('\n') {
                println!();
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parameters() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.index.n_trees, 100);
        assert_eq!(cfg.pipeline.search_k, 50_000);
        assert_eq!(cfg.pipeline.n_candidates, 512);
        assert_eq!(cfg.cutoffs, default_cutoffs());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"index":{"n_trees":5},"seed":3,"out_dir":"x"}"#).unwrap();
        let args = CommonArgs {
            config: Some(path),
            seed: Some(11),
            n_trees: Some(9),
            scorer: Some(ScorerChoice::Oracle),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.index.n_trees, 9);
        assert_eq!(cfg.index.seed, 11);
        assert_eq!(cfg.embedder.seed, 11);
        assert_eq!(cfg.out_dir, PathBuf::from("x"));
        assert_eq!(cfg.pipeline.scorer.kind, ScorerKind::Oracle);
        // untouched fields keep defaults
        assert_eq!(cfg.index.leaf_size, 16);
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from([
            "subjtag",
            "eval",
            "--compare",
            "stage1",
            "two_stage",
            "--format",
            "json",
            "--out",
            "o",
        ])
        .unwrap();
        match cli.command {
            Command::Eval {
                compare, format, ..
            } => {
                assert_eq!(compare.unwrap(), ["stage1", "two_stage"]);
                assert_eq!(format, Format::Json);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(Cli::try_parse_from(["subjtag", "gen-pairs", "--seed", "4"]).is_ok());
        assert!(Cli::try_parse_from(["subjtag", "frobnicate"]).is_err());
    }
}
