//! Document collection and topic ingestion, plus the credibility features
//! extracted from each page.

pub mod features;
pub mod pagerank;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::events;
use crate::text;

/// A corpus document as stored in the corpus JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    pub url: String,
    pub html: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_date: Option<String>,
}

impl RawDocument {
    /// True when `url` parses as an absolute URL with a host.
    pub fn url_is_valid(&self) -> bool {
        url::Url::parse(&self.url).is_ok_and(|u| u.host_str().is_some())
    }
}

/// Extracted visible text with its sentence segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDocument {
    pub doc_id: String,
    pub url: String,
    pub text: String,
    pub sentences: Vec<String>,
}

/// Strip markup from a raw document and segment it into sentences.
pub fn extract_text(doc: &RawDocument) -> ParsedDocument {
    let extraction = text::extract(&doc.html);
    ParsedDocument {
        doc_id: doc.doc_id.clone(),
        url: doc.url.clone(),
        text: extraction.text(),
        sentences: extraction.sentences,
    }
}

/// Documents read from a corpus file plus the number of skipped lines.
#[derive(Debug, Default)]
pub struct Ingested {
    pub documents: Vec<RawDocument>,
    pub skipped: usize,
}

/// Read a corpus JSONL file. Malformed lines are skipped and counted; the
/// whole file is rejected when more than half of its lines are malformed.
pub fn ingest_corpus(path: &Path) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Ingested::default();
    let mut lines = 0usize;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        match serde_json::from_str::<RawDocument>(&line) {
            Ok(doc) if !doc.doc_id.is_empty() => out.documents.push(doc),
            Ok(_) => {
                out.skipped += 1;
                events::emit(
                    "corpus_line_skipped",
                    json!({"line": lineno + 1, "reason": "empty doc_id"}),
                );
            }
            Err(e) => {
                out.skipped += 1;
                events::emit(
                    "corpus_line_skipped",
                    json!({"line": lineno + 1, "reason": e.to_string()}),
                );
            }
        }
    }
    if lines > 0 && out.skipped * 2 > lines {
        return Err(Error::CorpusFormat(format!(
            "{}: {} of {} lines malformed",
            path.display(),
            out.skipped,
            lines
        )));
    }
    events::emit(
        "corpus_ingested",
        json!({"path": path.display().to_string(), "documents": out.documents.len(), "skipped": out.skipped}),
    );
    Ok(out)
}

/// A search topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub topic_id: u32,
    pub title: String,
    pub description: String,
    /// The description restated as a declarative claim.
    pub claim: String,
    /// 1 for "yes", 0 for "no".
    #[serde(with = "answer_format")]
    pub answer: u8,
    #[serde(default)]
    pub narrative: String,
}

/// Which topic fields make up the retrieval query.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, PartialOrd, Ord,
)]
#[serde(rename_all = "snake_case")]
pub enum QueryFields {
    #[default]
    TitleDescription,
    Description,
    Title,
}

impl QueryFields {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryFields::TitleDescription => "title_description",
            QueryFields::Description => "description",
            QueryFields::Title => "title",
        }
    }
}

impl Topic {
    pub fn query_text(&self, fields: QueryFields) -> String {
        match fields {
            QueryFields::TitleDescription => format!("{} {}", self.title, self.description),
            QueryFields::Description => self.description.clone(),
            QueryFields::Title => self.title.clone(),
        }
    }
}

mod answer_format {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(answer: &u8, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(if *answer == 1 { "yes" } else { "no" })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u8, D::Error> {
        let raw = String::deserialize(d)?;
        match raw.to_ascii_lowercase().as_str() {
            "yes" => Ok(1),
            "no" => Ok(0),
            other => Err(serde::de::Error::custom(format!(
                "answer must be \"yes\" or \"no\", got {other:?}"
            ))),
        }
    }
}

/// Read a topics JSONL file. Unlike the corpus, every line must be valid.
pub fn load_topics(path: &Path) -> Result<Vec<Topic>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut topics: Vec<Topic> = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let topic: Topic = serde_json::from_str(&line)
            .map_err(|e| Error::TopicFormat(format!("line {}: {e}", lineno + 1)))?;
        if topic.claim.trim().is_empty() {
            return Err(Error::TopicFormat(format!(
                "topic {} has an empty claim",
                topic.topic_id
            )));
        }
        if topics.iter().any(|t| t.topic_id == topic.topic_id) {
            return Err(Error::TopicFormat(format!(
                "duplicate topic id {}",
                topic.topic_id
            )));
        }
        topics.push(topic);
    }
    Ok(topics)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    const GOOD: &str = r#"{"doc_id":"d1","url":"https://a.org/x","html":"<p>A.</p>"}"#;

    #[test]
    fn three_good_lines() {
        let f = write_lines(&[GOOD, GOOD, GOOD]);
        let got = ingest_corpus(f.path()).unwrap();
        assert_eq!(got.documents.len(), 3);
        assert_eq!(got.skipped, 0);
    }

    #[test]
    fn malformed_line_is_skipped() {
        let f = write_lines(&[GOOD, "{not json", GOOD, GOOD]);
        let (got, events) = events::capture(|| ingest_corpus(f.path()).unwrap());
        assert_eq!(got.documents.len(), 3);
        assert_eq!(got.skipped, 1);
        assert!(events.iter().any(|e| e["event"] == "corpus_line_skipped"));
    }

    #[test]
    fn mostly_malformed_is_an_error() {
        let f = write_lines(&[GOOD, "x", "y", "z"]);
        assert!(matches!(
            events::capture(|| ingest_corpus(f.path())).0,
            Err(Error::CorpusFormat(_))
        ));
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let f = write_lines(&[]);
        let got = events::capture(|| ingest_corpus(f.path()).unwrap()).0;
        assert!(got.documents.is_empty());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            ingest_corpus(Path::new("/nonexistent/corpus.jsonl")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn topics_parse_answers() {
        let f = write_lines(&[
            r#"{"topic_id":1,"title":"ibuprofen covid","description":"Can ibuprofen worsen COVID-19?","claim":"Ibuprofen worsens COVID-19.","answer":"no","narrative":""}"#,
        ]);
        let topics = load_topics(f.path()).unwrap();
        assert_eq!(topics[0].answer, 0);
        assert_eq!(
            topics[0].query_text(QueryFields::TitleDescription),
            "ibuprofen covid Can ibuprofen worsen COVID-19?"
        );
    }

    #[test]
    fn topic_answer_must_be_yes_or_no() {
        let f = write_lines(&[
            r#"{"topic_id":1,"title":"t","description":"d","claim":"c","answer":"maybe","narrative":""}"#,
        ]);
        assert!(matches!(load_topics(f.path()), Err(Error::TopicFormat(_))));
    }

    #[test]
    fn invalid_url_is_flagged() {
        let doc = RawDocument {
            doc_id: "d".into(),
            url: "not a url".into(),
            html: String::new(),
            published_date: None,
        };
        assert!(!doc.url_is_valid());
    }
}
