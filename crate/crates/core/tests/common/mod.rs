#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use subjtag::corpus::{render_document_text, render_subject_text, Corpus};
use subjtag::embedding::{embed_corpus, EmbedderConfig, EmbeddingMatrix, PromptConfig, Role};

pub fn bundled_corpus() -> Corpus {
    let dir = bundled_dir();
    Corpus::load(&dir.join("docs.jsonl"), &dir.join("subjects.jsonl")).unwrap()
}

pub fn bundled_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic")
}

/// Hash-embeds both sides of a corpus with the default prompts.
pub fn embed(corpus: &Corpus, dim: usize, seed: u64) -> (EmbeddingMatrix, EmbeddingMatrix) {
    let cfg = EmbedderConfig::hash(dim, seed);
    let prompts = PromptConfig::default();
    let docs: Vec<_> = corpus
        .documents
        .iter()
        .map(|d| (d.id.clone(), render_document_text(d)))
        .collect();
    let subjects: Vec<_> = corpus
        .subjects
        .iter()
        .map(|s| (s.code.clone(), render_subject_text(s)))
        .collect();
    (
        embed_corpus(&cfg, &docs, Role::Document, &prompts).unwrap(),
        embed_corpus(&cfg, &subjects, Role::Subject, &prompts).unwrap(),
    )
}

/// Minimal HTTP/1.1 server answering every request through `handler`, one
/// connection per request.
pub struct StubServer {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
}

impl StubServer {
    pub fn start<F>(handler: F) -> StubServer
    where
        F: Fn(&str, &str) -> (u16, String) + Send + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(AtomicUsize::new(0));
        let counter = requests.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                if reader.read_line(&mut request_line).is_err() {
                    continue;
                }
                let path = request_line
                    .split_whitespace()
                    .nth(1)
                    .unwrap_or("/")
                    .to_owned();
                let mut content_length = 0;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        content_length = v.trim().parse().unwrap_or(0);
                    }
                }
                let mut body = vec![0; content_length];
                let _ = reader.read_exact(&mut body);
                counter.fetch_add(1, Ordering::SeqCst);
                let (status, payload) = handler(&path, &String::from_utf8_lossy(&body));
                let response = format!(
                    "HTTP/1.1 {status} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                    payload.len()
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        StubServer { url, requests }
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}
