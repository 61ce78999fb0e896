//! Two-stage subject tagging.
//!
//! Documents are matched against a subject taxonomy in two steps. Stage 1
//! embeds both sides into unit vectors and retrieves `N` candidate subjects
//! per document from a random-projection forest ([`ann`]). Stage 2 scores
//! each `(document, candidate)` pair with a pair scorer and re-orders the
//! candidates ([`pipeline`]). [`eval`] measures average recall@k for both
//! stages.
//!
//! The `examples/` directory walks through each piece; the `subjtag` binary
//! wires them into a file-based workflow ([`cli`]).

pub mod ann;
mod binio;
pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
mod http;
pub mod pipeline;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
