//! Multi-aspect evaluation of TREC runs.

pub mod measures;
pub mod qrels;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

pub use measures::{average_precision, cam, compatibility, ndcg, rprec};
pub use qrels::{AspectLabels, AspectQrels, LabelMapping, MappedQrels, Measure, MAPPINGS};

use crate::error::{Error, Result};
use crate::trec::{Run, ScoredList};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    pub ndcg_depth: usize,
    pub persistence: f64,
    pub residual: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            ndcg_depth: measures::DEFAULT_NDCG_DEPTH,
            persistence: measures::DEFAULT_PERSISTENCE,
            residual: measures::DEFAULT_RESIDUAL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureResult {
    pub run_id: String,
    pub mapping_id: Option<u8>,
    pub mapping: String,
    pub measure: &'static str,
    pub per_topic: BTreeMap<u32, f64>,
    /// Mean over evaluated topics; 0 when none could be evaluated.
    pub mean: f64,
    /// Topics shared by run and qrels but without positive judgments.
    pub skipped: Vec<u32>,
}

/// One topic's value, or `None` when the topic has nothing to find.
pub fn evaluate_topic(
    list: &ScoredList,
    judged: &BTreeMap<String, Vec<u32>>,
    measure: Measure,
    params: &EvalParams,
) -> Option<f64> {
    let label = |d: &str, j: usize| judged.get(d).map(|l| l[j]).unwrap_or(0);
    let binary = |j: usize| -> (Vec<bool>, usize) {
        let gains = list.doc_ids().map(|d| label(d, j) > 0).collect();
        let r = judged.values().filter(|l| l[j] > 0).count();
        (gains, r)
    };
    match measure {
        Measure::CamMap | Measure::CamMapThree => {
            let arity = judged.values().next().map(Vec::len).unwrap_or(0);
            let aps: Vec<Option<f64>> = (0..arity)
                .map(|j| {
                    let (g, r) = binary(j);
                    average_precision(&g, r)
                })
                .collect();
            if aps.iter().all(Option::is_none) {
                return None;
            }
            Some(cam(&aps
                .into_iter()
                .map(|a| a.unwrap_or(0.0))
                .collect::<Vec<_>>()))
        }
        Measure::Ndcg => {
            let gains: Vec<f64> = list.doc_ids().map(|d| f64::from(label(d, 0))).collect();
            let all: Vec<f64> = judged.values().map(|l| f64::from(l[0])).collect();
            ndcg(&gains, &all, params.ndcg_depth)
        }
        Measure::Rprec => {
            let (g, r) = binary(0);
            rprec(&g, r)
        }
        Measure::Compatibility => {
            let run: Vec<&str> = list.doc_ids().collect();
            let gains: Vec<(&str, f64)> = judged
                .iter()
                .map(|(d, l)| (d.as_str(), f64::from(l[0])))
                .collect();
            compatibility(&run, &gains, params.persistence, params.residual)
        }
    }
}

/// Evaluate a run against one mapping's qrels over the topics both share.
pub fn evaluate_mapping(
    run: &Run,
    qrels: &MappedQrels,
    mapping: &LabelMapping,
    params: &EvalParams,
) -> Result<MeasureResult> {
    if qrels.arity != mapping.arity() {
        return Err(Error::Evaluation(format!(
            "{} qrels have {} label columns, expected {}",
            mapping.name,
            qrels.arity,
            mapping.arity()
        )));
    }
    let shared: Vec<u32> = run
        .topics
        .keys()
        .filter(|t| qrels.topics.contains_key(t))
        .copied()
        .collect();
    if shared.is_empty() {
        return Err(Error::Evaluation(format!(
            "run {} and {} qrels share no topics",
            run.tag, mapping.name
        )));
    }
    let mut per_topic = BTreeMap::new();
    let mut skipped = Vec::new();
    for t in shared {
        match evaluate_topic(&run.topics[&t], &qrels.topics[&t], mapping.measure, params) {
            Some(v) => {
                per_topic.insert(t, v);
            }
            None => skipped.push(t),
        }
    }
    let mean = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.values().sum::<f64>() / per_topic.len() as f64
    };
    Ok(MeasureResult {
        run_id: run.tag.clone(),
        mapping_id: mapping.id,
        mapping: mapping.name.to_owned(),
        measure: mapping.measure.as_str(),
        per_topic,
        mean,
        skipped,
    })
}

/// Qrels for every mapping, keyed by mapping name.
pub type QrelsSet = BTreeMap<String, MappedQrels>;

pub fn expand_all(q: &AspectQrels) -> QrelsSet {
    MAPPINGS
        .iter()
        .map(|m| (m.name.to_owned(), q.expand(m)))
        .collect()
}

/// Evaluate a run under each of the given mappings.
pub fn evaluate_run<'a>(
    run: &Run,
    qrels: &QrelsSet,
    mappings: impl IntoIterator<Item = &'a LabelMapping>,
    params: &EvalParams,
) -> Result<Vec<MeasureResult>> {
    mappings
        .into_iter()
        .map(|m| {
            let q = qrels
                .get(m.name)
                .ok_or_else(|| Error::Evaluation(format!("no qrels for {}", m.name)))?;
            evaluate_mapping(run, q, m, params)
        })
        .collect()
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

/// The mapping legend: id, qrels name, measure.
pub fn mapping_table() -> String {
    let mut out = String::from("mapping_id\tqrels\tmeasure\n");
    for m in qrels::adhoc_mappings() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            m.id.unwrap_or_default(),
            m.name,
            m.measure.as_str()
        );
    }
    out
}

/// One row per run, one column per mapping id.
pub fn adhoc_table(results: &BTreeMap<String, Vec<MeasureResult>>) -> String {
    let ids: Vec<u8> = qrels::adhoc_mappings().filter_map(|m| m.id).collect();
    let mut out = String::from("run_id");
    for id in &ids {
        let _ = write!(out, "\t{id}");
    }
    out.push('\n');
    for (run, rows) in results {
        out.push_str(run);
        for id in &ids {
            let cell = rows
                .iter()
                .find(|r| r.mapping_id == Some(*id))
                .map(|r| fmt4(r.mean))
                .unwrap_or_else(|| "-".into());
            let _ = write!(out, "\t{cell}");
        }
        out.push('\n');
    }
    out
}

/// Total-recall runs with their Rprec, best last.
pub fn rprec_table(results: &BTreeMap<String, MeasureResult>) -> String {
    let mut rows: Vec<(&String, f64)> = results.iter().map(|(r, m)| (r, m.mean)).collect();
    rows.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let mut out = String::from("run_id\trprec\n");
    for (r, v) in rows {
        let _ = writeln!(out, "{r}\t{}", fmt4(v));
    }
    out
}

/// Per run: harmful-only compatibility (lower is better) against
/// helpful-only compatibility (higher is better).
pub fn harmful_helpful_csv(results: &BTreeMap<String, Vec<MeasureResult>>) -> String {
    let mut out = String::from("run_id,harmful,helpful\n");
    for (run, rows) in results {
        let get = |id: u8| {
            rows.iter()
                .find(|r| r.mapping_id == Some(id))
                .map(|r| r.mean)
        };
        if let (Some(h), Some(g)) = (get(7), get(8)) {
            let _ = writeln!(out, "{run},{h},{g}");
        }
    }
    out
}
