//! Multi-aspect judgments and the label mappings that turn them into
//! per-measure gains.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Labels of one judged document. Credibility and correctness may be
/// unjudged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AspectLabels {
    pub useful: u8,
    pub credible: Option<u8>,
    pub correct: Option<u8>,
}

impl AspectLabels {
    fn is(v: Option<u8>) -> bool {
        v == Some(1)
    }

    fn is_not(v: Option<u8>) -> bool {
        v == Some(0)
    }
}

/// Judgments keyed by topic, then doc id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AspectQrels {
    pub topics: BTreeMap<u32, BTreeMap<String, AspectLabels>>,
}

fn parse_label(s: &str, what: &str, line: usize) -> Result<Option<u8>> {
    match s {
        "-" | "-1" | "unjudged" => Ok(None),
        "0" => Ok(Some(0)),
        "1" => Ok(Some(1)),
        _ => Err(Error::Qrels(format!("line {line}: bad {what} label {s:?}"))),
    }
}

impl AspectQrels {
    /// Parse the combined format `topic docid useful credible correct`,
    /// where `-` (or `-1`) marks an unjudged aspect.
    pub fn parse(text: &str) -> Result<Self> {
        let mut q = AspectQrels::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.is_empty() {
                continue;
            }
            if cols.len() != 5 {
                return Err(Error::Qrels(format!("line {lineno}: expected 5 columns")));
            }
            let topic: u32 = cols[0]
                .parse()
                .map_err(|_| Error::Qrels(format!("line {lineno}: bad topic id")))?;
            let useful = parse_label(cols[2], "usefulness", lineno)?
                .ok_or_else(|| Error::Qrels(format!("line {lineno}: usefulness must be judged")))?;
            let labels = AspectLabels {
                useful,
                credible: parse_label(cols[3], "credibility", lineno)?,
                correct: parse_label(cols[4], "correctness", lineno)?,
            };
            if q.topics
                .entry(topic)
                .or_default()
                .insert(cols[1].to_owned(), labels)
                .is_some()
            {
                return Err(Error::Qrels(format!(
                    "line {lineno}: document {} judged twice for topic {topic}",
                    cols[1]
                )));
            }
        }
        if q.topics.is_empty() {
            return Err(Error::Qrels("no judgments".into()));
        }
        Ok(q)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AspectQrels::parse(&text).map_err(|e| Error::Qrels(format!("{}: {e}", path.display())))
    }

    /// Per-mapping qrels derived from the combined judgments.
    pub fn expand(&self, mapping: &LabelMapping) -> MappedQrels {
        let topics = self
            .topics
            .iter()
            .map(|(&t, docs)| {
                let labels = docs
                    .iter()
                    .map(|(d, l)| (d.clone(), mapping.labels(l)))
                    .collect();
                (t, labels)
            })
            .collect();
        MappedQrels {
            name: mapping.name.to_owned(),
            arity: mapping.arity(),
            topics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    CamMap,
    CamMapThree,
    Ndcg,
    Compatibility,
    Rprec,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::CamMap => "cam_map",
            Measure::CamMapThree => "cam_map_three",
            Measure::Ndcg => "ndcg",
            Measure::Compatibility => "compatibility",
            Measure::Rprec => "rprec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AspectGain {
    Useful,
    Credible,
    Correct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    /// Gain 1 when every listed aspect holds.
    Conjunction(&'static [AspectGain]),
    /// Useful and incorrect.
    UsefulIncorrect,
    /// Useful with the given correctness: gain 1 + credibility.
    Graded { correct: u8 },
    /// One binary label per aspect, for CAM.
    PerAspect(&'static [AspectGain]),
}

/// A named way of mapping aspect labels to gains, with its measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelMapping {
    /// Position in the ad-hoc results table, if it appears there.
    pub id: Option<u8>,
    pub name: &'static str,
    pub measure: Measure,
    rule: Rule,
}

use AspectGain::*;

pub const MAPPINGS: [LabelMapping; 10] = [
    LabelMapping {
        id: Some(0),
        name: "2aspects.correct-credible",
        measure: Measure::CamMap,
        rule: Rule::PerAspect(&[Correct, Credible]),
    },
    LabelMapping {
        id: Some(1),
        name: "2aspects.useful-credible",
        measure: Measure::CamMap,
        rule: Rule::PerAspect(&[Useful, Credible]),
    },
    LabelMapping {
        id: Some(2),
        name: "3aspects",
        measure: Measure::CamMapThree,
        rule: Rule::PerAspect(&[Useful, Correct, Credible]),
    },
    LabelMapping {
        id: Some(3),
        name: "binary.useful",
        measure: Measure::Ndcg,
        rule: Rule::Conjunction(&[Useful]),
    },
    LabelMapping {
        id: Some(4),
        name: "binary.useful-correct",
        measure: Measure::Ndcg,
        rule: Rule::Conjunction(&[Useful, Correct]),
    },
    LabelMapping {
        id: Some(5),
        name: "binary.useful-correct-credible",
        measure: Measure::Ndcg,
        rule: Rule::Conjunction(&[Useful, Correct, Credible]),
    },
    LabelMapping {
        id: Some(6),
        name: "binary.useful-credible",
        measure: Measure::Ndcg,
        rule: Rule::Conjunction(&[Useful, Credible]),
    },
    LabelMapping {
        id: Some(7),
        name: "graded.harmful-only",
        measure: Measure::Compatibility,
        rule: Rule::Graded { correct: 0 },
    },
    LabelMapping {
        id: Some(8),
        name: "graded.helpful-only",
        measure: Measure::Compatibility,
        rule: Rule::Graded { correct: 1 },
    },
    LabelMapping {
        id: None,
        name: "binary.useful-incorrect",
        measure: Measure::Rprec,
        rule: Rule::UsefulIncorrect,
    },
];

/// The nine mappings of the ad-hoc results table, in id order.
pub fn adhoc_mappings() -> impl Iterator<Item = &'static LabelMapping> {
    MAPPINGS.iter().filter(|m| m.id.is_some())
}

pub fn mapping_by_name(name: &str) -> Option<&'static LabelMapping> {
    MAPPINGS.iter().find(|m| m.name == name)
}

pub fn mapping_by_id(id: u8) -> Option<&'static LabelMapping> {
    MAPPINGS.iter().find(|m| m.id == Some(id))
}

/// The mapping used for the total-recall Rprec table.
pub fn total_recall_mapping() -> &'static LabelMapping {
    mapping_by_name("binary.useful-incorrect").expect("defined above")
}

fn holds(aspect: AspectGain, l: &AspectLabels) -> bool {
    match aspect {
        Useful => l.useful == 1,
        Credible => AspectLabels::is(l.credible),
        Correct => AspectLabels::is(l.correct),
    }
}

impl LabelMapping {
    /// Number of label columns (more than one only for CAM mappings).
    pub fn arity(&self) -> usize {
        match self.rule {
            Rule::PerAspect(a) => a.len(),
            _ => 1,
        }
    }

    /// The label column(s) for one document.
    pub fn labels(&self, l: &AspectLabels) -> Vec<u32> {
        match self.rule {
            Rule::Conjunction(aspects) => vec![u32::from(aspects.iter().all(|&a| holds(a, l)))],
            Rule::UsefulIncorrect => {
                vec![u32::from(l.useful == 1 && AspectLabels::is_not(l.correct))]
            }
            Rule::Graded { correct } => {
                let gain = if l.useful == 1 && l.correct == Some(correct) {
                    1 + u32::from(AspectLabels::is(l.credible))
                } else {
                    0
                };
                vec![gain]
            }
            Rule::PerAspect(aspects) => aspects.iter().map(|&a| u32::from(holds(a, l))).collect(),
        }
    }
}

/// Qrels for one mapping: per topic and document, one label per column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MappedQrels {
    pub name: String,
    pub arity: usize,
    pub topics: BTreeMap<u32, BTreeMap<String, Vec<u32>>>,
}

impl MappedQrels {
    /// Parse `topic 0 docid label [label ...]` with `arity` label columns.
    pub fn parse(name: &str, arity: usize, text: &str) -> Result<Self> {
        let mut q = MappedQrels {
            name: name.to_owned(),
            arity,
            topics: BTreeMap::new(),
        };
        for (i, line) in text.lines().enumerate() {
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Qrels(format!("{name} line {}: {m}", i + 1));
            if cols.len() != 3 + arity {
                return Err(bad(&format!("expected {} columns", 3 + arity)));
            }
            let topic: u32 = cols[0].parse().map_err(|_| bad("bad topic id"))?;
            let labels = cols[3..]
                .iter()
                .map(|c| {
                    c.parse::<i64>()
                        .map(|v| v.max(0) as u32)
                        .map_err(|_| bad("bad label"))
                })
                .collect::<Result<Vec<u32>>>()?;
            if q.topics
                .entry(topic)
                .or_default()
                .insert(cols[2].to_owned(), labels)
                .is_some()
            {
                return Err(bad(&format!("document {} judged twice", cols[2])));
            }
        }
        if q.topics.is_empty() {
            return Err(Error::Qrels(format!("{name}: no judgments")));
        }
        Ok(q)
    }

    pub fn load(mapping: &LabelMapping, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MappedQrels::parse(mapping.name, mapping.arity(), &text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, docs) in &self.topics {
            for (d, labels) in docs {
                let cols: Vec<String> = labels.iter().map(u32::to_string).collect();
                let _ = writeln!(out, "{t} 0 {d} {}", cols.join(" "));
            }
        }
        out
    }
}
