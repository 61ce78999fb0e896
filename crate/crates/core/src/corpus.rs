//! Documents and subjects: line-delimited JSON ingest, validation, and the
//! single-string renderings fed to the embedder and the pair scorer.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joins title/abstract and name/definition.
pub const FIELD_SEPARATOR: &str = "\n";

/// A record to be tagged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub language: String,
    #[serde(default)]
    pub gold_subjects: Vec<String>,
}

/// A taxonomy entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subject {
    pub code: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definition: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub n_documents: usize,
    pub n_subjects: usize,
    /// `(document id, code)` for every gold code missing from the taxonomy.
    pub unknown_gold_codes: Vec<(String, String)>,
    pub empty_rendered_texts: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.unknown_gold_codes.is_empty() && self.empty_rendered_texts.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} documents, {} subjects",
            self.n_documents, self.n_subjects
        )?;
        for (doc, code) in &self.unknown_gold_codes {
            write!(f, "; document `{doc}` references unknown subject `{code}`")?;
        }
        for id in &self.empty_rendered_texts {
            write!(f, "; record `{id}` renders to empty text")?;
        }
        Ok(())
    }
}

/// Documents and subjects loaded together.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub subjects: Vec<Subject>,
}

impl Corpus {
    pub fn load(docs: &Path, subjects: &Path) -> Result<Self> {
        Ok(Corpus {
            documents: parse_documents(&read_utf8(docs)?)?,
            subjects: parse_subjects(&read_utf8(subjects)?)?,
        })
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.documents, &self.subjects)
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }
}

fn parse_lines<T, F>(input: &str, mut check: F) -> Result<Vec<T>>
where
    T: for<'de> Deserialize<'de>,
    F: FnMut(&T, usize) -> Result<()>,
{
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        check(&record, idx + 1)?;
        out.push(record);
    }
    Ok(out)
}

/// Parses `docs.jsonl` content. Missing `abstract` becomes the empty string and
/// missing `gold_subjects` an empty list.
pub fn parse_documents(input: &str) -> Result<Vec<Document>> {
    let mut seen = HashSet::new();
    parse_lines(input, |d: &Document, line| {
        if d.id.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty document id".into(),
            });
        }
        if d.title.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: format!("document `{}` has an empty title", d.id),
            });
        }
        if !seen.insert(d.id.clone()) {
            return Err(Error::Duplicate {
                kind: "document id",
                id: d.id.clone(),
            });
        }
        Ok(())
    })
}

/// Parses `subjects.jsonl` content. An absent definition stays `None`.
pub fn parse_subjects(input: &str) -> Result<Vec<Subject>> {
    let mut seen = HashSet::new();
    parse_lines(input, |s: &Subject, line| {
        if s.code.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty subject code".into(),
            });
        }
        if s.name.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: format!("subject `{}` has an empty name", s.code),
            });
        }
        if !seen.insert(s.code.clone()) {
            return Err(Error::Duplicate {
                kind: "subject code",
                id: s.code.clone(),
            });
        }
        Ok(())
    })
}

/// Reads a file as UTF-8; invalid bytes are reported with their 1-based line.
pub fn read_utf8(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| {
        let valid = e.utf8_error().valid_up_to();
        let line = e.as_bytes()[..valid]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        Error::Parse {
            line,
            message: format!("{}: invalid UTF-8", path.display()),
        }
    })
}

pub fn documents_to_jsonl(docs: &[Document]) -> String {
    to_jsonl(docs)
}

pub fn subjects_to_jsonl(subjects: &[Subject]) -> String {
    to_jsonl(subjects)
}

fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("plain records always serialize"));
        out.push('\n');
    }
    out
}

/// Title, then abstract when non-empty, each trimmed.
pub fn render_document_text(d: &Document) -> String {
    join_fields(&d.title, Some(&d.abstract_text))
}

/// Name, then definition when present and non-empty, each trimmed.
pub fn render_subject_text(s: &Subject) -> String {
    join_fields(&s.name, s.definition.as_deref())
}

fn join_fields(head: &str, tail: Option<&str>) -> String {
    let head = head.trim();
    match tail.map(str::trim) {
        Some(t) if !t.is_empty() => format!("{head}{FIELD_SEPARATOR}{t}"),
        _ => head.to_owned(),
    }
}

pub fn validate(docs: &[Document], subjects: &[Subject]) -> ValidationReport {
    let codes: HashSet<&str> = subjects.iter().map(|s| s.code.as_str()).collect();
    let mut report = ValidationReport {
        n_documents: docs.len(),
        n_subjects: subjects.len(),
        ..Default::default()
    };
    for d in docs {
        for code in &d.gold_subjects {
            if !codes.contains(code.as_str()) {
                report.unknown_gold_codes.push((d.id.clone(), code.clone()));
            }
        }
        if render_document_text(d).is_empty() {
            report.empty_rendered_texts.push(d.id.clone());
        }
    }
    for s in subjects {
        if render_subject_text(s).is_empty() {
            report.empty_rendered_texts.push(s.code.clone());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, title: &str, abs: &str, gold: &[&str]) -> Document {
        Document {
            id: id.into(),
            title: title.into(),
            abstract_text: abs.into(),
            language: String::new(),
            gold_subjects: gold.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn subject(code: &str, name: &str, def: Option<&str>) -> Subject {
        Subject {
            code: code.into(),
            name: name.into(),
            definition: def.map(Into::into),
        }
    }

    #[test]
    fn parses_full_document() {
        let docs =
            parse_documents(r#"{"id":"d1","title":"T","abstract":"A","gold_subjects":["s1"]}"#)
                .unwrap();
        assert_eq!(docs, vec![doc("d1", "T", "A", &["s1"])]);
    }

    #[test]
    fn missing_fields_default() {
        let docs = parse_documents("{\"id\":\"d2\",\"title\":\"T\"}\n\n").unwrap();
        assert_eq!(docs, vec![doc("d2", "T", "", &[])]);
    }

    #[test]
    fn duplicate_document_id() {
        let err =
            parse_documents("{\"id\":\"d1\",\"title\":\"T\"}\n{\"id\":\"d1\",\"title\":\"U\"}")
                .unwrap_err();
        assert!(
            matches!(err, Error::Duplicate { ref id, .. } if id == "d1"),
            "{err}"
        );
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_documents("{\"id\":\"d1\",\"title\":\"T\"}\n\n{oops").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn blank_title_rejected() {
        assert!(parse_documents(r#"{"id":"d1","title":"  "}"#).is_err());
    }

    #[test]
    fn parses_subjects() {
        let subs = parse_subjects(
            "{\"code\":\"gnd1\",\"name\":\"Erdbeben\",\"definition\":\"...\"}\n{\"code\":\"gnd2\",\"name\":\"Bauwesen\"}",
        )
        .unwrap();
        assert_eq!(subs[0].definition.as_deref(), Some("..."));
        assert_eq!(subs[1].definition, None);
    }

    #[test]
    fn duplicate_subject_code() {
        let err = parse_subjects(
            "{\"code\":\"gnd1\",\"name\":\"A\"}\n{\"code\":\"gnd1\",\"name\":\"B\"}",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Duplicate { ref id, .. } if id == "gnd1"));
    }

    #[test]
    fn empty_subject_name() {
        assert!(parse_subjects(r#"{"code":"gnd1","name":""}"#).is_err());
    }

    #[test]
    fn renders_documents() {
        assert_eq!(render_document_text(&doc("d", "T", "A", &[])), "T\nA");
        assert_eq!(render_document_text(&doc("d", "T", "", &[])), "T");
        assert_eq!(render_document_text(&doc("d", " T ", "A", &[])), "T\nA");
    }

    #[test]
    fn trimmed_render_survives_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("docs.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"d1\",\"title\":\" T \",\"abstract\":\"A\"}\n",
        )
        .unwrap();
        let docs = parse_documents(&read_utf8(&path).unwrap()).unwrap();
        assert_eq!(render_document_text(&docs[0]), "T\nA");
    }

    #[test]
    fn renders_subjects() {
        assert_eq!(render_subject_text(&subject("c", "N", Some("D"))), "N\nD");
        assert_eq!(render_subject_text(&subject("c", "N", None)), "N");
        assert_eq!(render_subject_text(&subject("c", "N", Some(""))), "N");
    }

    #[test]
    fn invalid_utf8_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, b"{\"id\":\"a\",\"title\":\"b\"}\n\xff\xfe").unwrap();
        assert!(matches!(
            read_utf8(&path),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn validate_reports_dangling_code() {
        let docs = vec![
            doc("d1", "T", "", &["s1"]),
            doc("d2", "T", "", &["x"]),
            doc("d3", "T", "", &[]),
        ];
        let subs = vec![subject("s1", "A", None), subject("s2", "B", None)];
        let report = validate(&docs, &subs);
        assert_eq!(report.n_documents, 3);
        assert_eq!(report.n_subjects, 2);
        assert_eq!(report.unknown_gold_codes, vec![("d2".into(), "x".into())]);
        assert!(!report.is_valid());
        assert_eq!(validate(&docs, &subs), report);
    }

    #[test]
    fn validate_clean_corpus() {
        let docs = vec![doc("d1", "T", "A", &["s1"])];
        let subs = vec![subject("s1", "A", None)];
        let report = validate(&docs, &subs);
        assert!(report.unknown_gold_codes.is_empty());
        assert!(report.empty_rendered_texts.is_empty());
        assert!(report.is_valid());
    }
}
