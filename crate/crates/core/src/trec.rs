//! TREC run files: `topic_id Q0 doc_id rank score tag`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One topic's ranking, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredList {
    pub topic_id: u32,
    pub entries: Vec<(String, f64)>,
}

impl ScoredList {
    pub fn new(topic_id: u32) -> Self {
        ScoredList {
            topic_id,
            entries: Vec::new(),
        }
    }

    /// Sort by descending score, ties by ascending doc id, and keep `k`.
    pub fn from_unsorted(topic_id: u32, mut entries: Vec<(String, f64)>, k: usize) -> Self {
        sort_desc(&mut entries);
        entries.truncate(k);
        ScoredList { topic_id, entries }
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(d, _)| d.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Descending score, ties broken by ascending doc id.
pub fn sort_desc(entries: &mut [(String, f64)]) {
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

/// A run: rankings for several topics, keyed by topic id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    pub tag: String,
    pub topics: BTreeMap<u32, ScoredList>,
}

impl Run {
    pub fn new(tag: impl Into<String>) -> Self {
        Run {
            tag: tag.into(),
            topics: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, list: ScoredList) {
        self.topics.insert(list.topic_id, list);
    }

    /// Serialize in TREC format; ranks are 1-based and scores use the
    /// shortest representation that round-trips.
    pub fn to_trec(&self) -> String {
        let mut out = String::new();
        for list in self.topics.values() {
            for (rank, (doc, score)) in list.entries.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{} Q0 {} {} {} {}",
                    list.topic_id,
                    doc,
                    rank + 1,
                    score,
                    self.tag
                );
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_trec()).map_err(|e| Error::io(path, e))
    }

    /// Parse a TREC run. Lines are ordered by the rank column within each
    /// topic; the tag is taken from the first line.
    pub fn parse(text: &str) -> Result<Run> {
        let mut run = Run::default();
        let mut ranked: BTreeMap<u32, Vec<(u64, String, f64)>> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| Error::RunFormat(format!("line {}: {m}", lineno + 1));
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 6 {
                return Err(bad("expected 6 columns"));
            }
            let topic: u32 = cols[0].parse().map_err(|_| bad("bad topic id"))?;
            let rank: u64 = cols[3].parse().map_err(|_| bad("bad rank"))?;
            let score: f64 = cols[4].parse().map_err(|_| bad("bad score"))?;
            if run.tag.is_empty() {
                run.tag = cols[5].to_owned();
            }
            ranked
                .entry(topic)
                .or_default()
                .push((rank, cols[2].to_owned(), score));
        }
        for (topic, mut rows) in ranked {
            rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            let mut seen = std::collections::HashSet::new();
            let entries = rows
                .into_iter()
                .filter(|(_, d, _)| seen.insert(d.clone()))
                .map(|(_, d, s)| (d, s))
                .collect();
            run.insert(ScoredList {
                topic_id: topic,
                entries,
            });
        }
        Ok(run)
    }

    pub fn read(path: &Path) -> Result<Run> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Run::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_break_by_doc_id() {
        let list = ScoredList::from_unsorted(
            1,
            vec![("b".into(), 1.0), ("a".into(), 1.0), ("c".into(), 2.0)],
            10,
        );
        assert_eq!(list.doc_ids().collect::<Vec<_>>(), vec!["c", "a", "b"]);
    }

    #[test]
    fn trec_round_trip() {
        let mut run = Run::new("tag1");
        run.insert(ScoredList::from_unsorted(
            3,
            vec![("d1".into(), 0.1 + 0.2), ("d2".into(), -1.5)],
            10,
        ));
        let text = run.to_trec();
        assert_eq!(
            text.lines().next().unwrap(),
            "3 Q0 d1 1 0.30000000000000004 tag1"
        );
        assert_eq!(Run::parse(&text).unwrap(), run);
    }

    #[test]
    fn rejects_short_lines() {
        assert!(Run::parse("1 Q0 d1 1 0.5\n").is_err());
    }
}
