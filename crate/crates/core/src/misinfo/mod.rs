//! Stance-based misinformation scores.
//!
//! A document's stance toward a topic claim is a distribution over
//! (disagree, agree, neutral). The score is the probability of the stance
//! matching the wrong answer minus that of the stance matching the correct
//! one, so documents contradicting the answer score high.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;
use serde_json::json;

use crate::corpus::{ParsedDocument, Topic};
use crate::error::{Error, Result};
use crate::events;
use crate::text::porter;
use crate::text::{is_stopword, raw_tokens};

pub const DISAGREE: usize = 0;
pub const AGREE: usize = 1;
pub const NEUTRAL: usize = 2;

const SUM_TOLERANCE: f64 = 1e-6;
/// External triples further than this from summing to one are rejected.
pub const REJECT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StanceProbabilities {
    /// Indexed by [`DISAGREE`], [`AGREE`], [`NEUTRAL`].
    pub p: [f64; 3],
}

impl StanceProbabilities {
    /// Validate a triple. Components must lie in [0, 1] and sum to one
    /// within `REJECT_TOLERANCE`; small deviations are renormalized.
    pub fn new(disagree: f64, agree: f64, neutral: f64) -> Result<Self> {
        let p = [disagree, agree, neutral];
        if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Stance(format!("probabilities out of range: {p:?}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > REJECT_TOLERANCE {
            return Err(Error::Stance(format!("probabilities sum to {sum}, not 1")));
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Ok(StanceProbabilities {
                p: p.map(|v| v / sum),
            });
        }
        Ok(StanceProbabilities { p })
    }

    pub fn uniform() -> Self {
        StanceProbabilities { p: [1.0 / 3.0; 3] }
    }
}

/// s = P(1 − a) − P(a) for the topic answer `a` (1 = yes, 0 = no).
pub fn misinformation_score(p: &StanceProbabilities, answer: u8) -> f64 {
    let a = usize::from(answer == 1);
    p.p[1 - a] - p.p[a]
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisinfoScore {
    pub topic_id: u32,
    pub doc_id: String,
    pub s: f64,
}

impl MisinfoScore {
    pub fn new(topic: &Topic, doc_id: impl Into<String>, p: &StanceProbabilities) -> Self {
        MisinfoScore {
            topic_id: topic.topic_id,
            doc_id: doc_id.into(),
            s: misinformation_score(p, topic.answer),
        }
    }
}

pub const NO_TRIGGER: &str = "none";

/// The part of a document from the first sentence mentioning the topic on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimmedDocument {
    pub doc_id: String,
    pub topic_id: u32,
    pub sentences: Vec<String>,
    pub text: String,
    /// The matched keyword, or `"none"` when the document was kept whole.
    pub trigger: String,
}

pub fn trim_to_claim(doc: &ParsedDocument, topic: &Topic) -> TrimmedDocument {
    trim_sentences(&doc.doc_id, &doc.sentences, topic)
}

/// Re-trimming an already trimmed document leaves it unchanged.
pub fn retrim(doc: &TrimmedDocument, topic: &Topic) -> TrimmedDocument {
    trim_sentences(&doc.doc_id, &doc.sentences, topic)
}

fn trim_sentences(doc_id: &str, sentences: &[String], topic: &Topic) -> TrimmedDocument {
    let keyword = topic.title.trim().to_lowercase();
    let first = if keyword.is_empty() {
        None
    } else {
        sentences
            .iter()
            .position(|s| s.to_lowercase().contains(&keyword))
    };
    let (kept, trigger) = match first {
        Some(i) => (&sentences[i..], keyword),
        None => (sentences, NO_TRIGGER.to_owned()),
    };
    TrimmedDocument {
        doc_id: doc_id.to_owned(),
        topic_id: topic.topic_id,
        sentences: kept.to_vec(),
        text: kept.join(" "),
        trigger,
    }
}

/// Stance probabilities read from an interchange file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalStance {
    pub probabilities: BTreeMap<(u32, String), StanceProbabilities>,
    /// Records whose probabilities were out of range or unnormalized.
    pub rejected: usize,
    pub duplicates: usize,
}

impl ExternalStance {
    pub fn get(&self, topic_id: u32, doc_id: &str) -> Option<&StanceProbabilities> {
        self.probabilities.get(&(topic_id, doc_id.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

#[derive(Deserialize)]
struct StanceRecord {
    topic_id: u32,
    doc_id: String,
    p_disagree: f64,
    p_agree: f64,
    p_neutral: f64,
}

pub fn load_external_stance(path: &Path) -> Result<ExternalStance> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = ExternalStance::default();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: StanceRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Stance(format!("{} line {}: {e}", path.display(), lineno + 1)))?;
        let p = match StanceProbabilities::new(rec.p_disagree, rec.p_agree, rec.p_neutral) {
            Ok(p) => p,
            Err(e) => {
                out.rejected += 1;
                events::emit(
                    "stance_rejected",
                    json!({"line": lineno + 1, "topic_id": rec.topic_id, "doc_id": rec.doc_id, "reason": e.to_string()}),
                );
                continue;
            }
        };
        if out
            .probabilities
            .insert((rec.topic_id, rec.doc_id.clone()), p)
            .is_some()
        {
            out.duplicates += 1;
            events::emit(
                "stance_duplicate",
                json!({"line": lineno + 1, "topic_id": rec.topic_id, "doc_id": rec.doc_id}),
            );
        }
    }
    Ok(out)
}

/// Cue phrases for the lexical stance baseline, one per line.
#[derive(Debug, Clone, PartialEq)]
pub struct CueLists {
    pub agree: Vec<Vec<String>>,
    pub disagree: Vec<Vec<String>>,
    pub negations: HashSet<String>,
}

impl Default for CueLists {
    fn default() -> Self {
        CueLists::parse(
            include_str!("cues/agree.txt"),
            include_str!("cues/disagree.txt"),
            include_str!("cues/negations.txt"),
        )
    }
}

impl CueLists {
    pub fn parse(agree: &str, disagree: &str, negations: &str) -> Self {
        let phrases = |s: &str| -> Vec<Vec<String>> {
            let mut v: Vec<Vec<String>> = s
                .lines()
                .map(|l| raw_tokens(l).collect::<Vec<_>>())
                .filter(|p| !p.is_empty())
                .collect();
            // Longest phrases first so "no evidence" wins over "evidence".
            v.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            v
        };
        CueLists {
            agree: phrases(agree),
            disagree: phrases(disagree),
            negations: negations.lines().flat_map(raw_tokens).collect(),
        }
    }

    /// Load `agree.txt`, `disagree.txt` and `negations.txt` from a directory.
    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
        };
        Ok(CueLists::parse(
            &read("agree.txt")?,
            &read("disagree.txt")?,
            &read("negations.txt")?,
        ))
    }
}

/// Cue counts found in a trimmed document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CueCounts {
    pub agree: usize,
    pub disagree: usize,
}

impl CueCounts {
    /// Additive smoothing: p_agree = (n_agree + 1) / (n_agree + n_disagree + 3).
    pub fn probabilities(&self) -> StanceProbabilities {
        let total = (self.agree + self.disagree + 3) as f64;
        let pa = (self.agree + 1) as f64 / total;
        let pd = (self.disagree + 1) as f64 / total;
        StanceProbabilities {
            p: [pd, pa, 1.0 / total],
        }
    }
}

const NEGATION_WINDOW: usize = 3;

pub fn count_cues(text: &str, topic: &Topic, cues: &CueLists) -> CueCounts {
    let tokens: Vec<String> = raw_tokens(text).collect();
    let mut used = vec![false; tokens.len()];
    let mut counts = CueCounts::default();
    counts.disagree += mark_phrases(&tokens, &mut used, &cues.disagree);
    counts.agree += mark_phrases(&tokens, &mut used, &cues.agree);

    let content: HashSet<String> = raw_tokens(&format!("{} {}", topic.title, topic.claim))
        .filter(|t| !is_stopword(t) && !cues.negations.contains(t))
        .map(|t| porter::stem(&t))
        .collect();
    let stems: Vec<String> = tokens.iter().map(|t| porter::stem(t)).collect();
    for (i, tok) in tokens.iter().enumerate() {
        if used[i] || !cues.negations.contains(tok) {
            continue;
        }
        let lo = i.saturating_sub(NEGATION_WINDOW);
        let hi = (i + NEGATION_WINDOW).min(tokens.len() - 1);
        if (lo..=hi).any(|j| j != i && content.contains(&stems[j])) {
            counts.disagree += 1;
        }
    }
    counts
}

/// Count non-overlapping phrase occurrences left to right, marking the
/// tokens they cover.
fn mark_phrases(tokens: &[String], used: &mut [bool], phrases: &[Vec<String>]) -> usize {
    let mut n = 0;
    let mut i = 0;
    while i < tokens.len() {
        let hit = phrases.iter().find(|p| {
            i + p.len() <= tokens.len()
                && !used[i..i + p.len()].iter().any(|&u| u)
                && tokens[i..i + p.len()] == p[..]
        });
        match hit {
            Some(p) => {
                used[i..i + p.len()].iter_mut().for_each(|u| *u = true);
                n += 1;
                i += p.len();
            }
            None => i += 1,
        }
    }
    n
}

/// Deterministic cue-counting stand-in for a learned stance model.
pub fn lexical_stance(
    trimmed: &TrimmedDocument,
    topic: &Topic,
    cues: &CueLists,
) -> StanceProbabilities {
    count_cues(&trimmed.text, topic, cues).probabilities()
}
