//! Merging relevance, credibility and misinformation into one ranking.

pub mod recipe;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trec::ScoredList;

pub use recipe::{apply_recipe, Distance, FusionRecipe, Orientation, Strategy, Task};

pub const DEFAULT_RRF_K: i64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    Relevance,
    Credibility,
    Misinformation,
}

impl Aspect {
    pub const ALL: [Aspect; 3] = [
        Aspect::Relevance,
        Aspect::Credibility,
        Aspect::Misinformation,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Relevance => "relevance",
            Aspect::Credibility => "credibility",
            Aspect::Misinformation => "misinformation",
        }
    }
}

/// One value per aspect.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerAspect<T> {
    pub relevance: T,
    pub credibility: T,
    pub misinformation: T,
}

impl<T: Copy> PerAspect<T> {
    pub fn new(relevance: T, credibility: T, misinformation: T) -> Self {
        PerAspect {
            relevance,
            credibility,
            misinformation,
        }
    }

    pub fn get(&self, a: Aspect) -> T {
        match a {
            Aspect::Relevance => self.relevance,
            Aspect::Credibility => self.credibility,
            Aspect::Misinformation => self.misinformation,
        }
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.relevance, self.credibility, self.misinformation]
    }
}

/// Standardize with the population standard deviation. A constant input
/// (including a single value) maps to all zeros.
pub fn zscore_normalize(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| (v - mean) / sd).collect()
}

pub fn reverse_aspect(z: f64) -> f64 {
    -z
}

pub fn weighted_average(z: &[f64; 3], w: &[f64; 3]) -> f64 {
    z.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Coordinatewise max (or min, per orientation) over the document vectors.
pub fn best_score_vector(z: &[[f64; 3]], orientation: &[Orientation; 3]) -> [f64; 3] {
    let mut best = [0.0; 3];
    for a in 0..3 {
        let vals = z.iter().map(|v| v[a]);
        best[a] = match orientation[a] {
            Orientation::Max => vals.fold(f64::NEG_INFINITY, f64::max),
            Orientation::Min => vals.fold(f64::INFINITY, f64::min),
        };
    }
    best
}

pub fn distance(metric: Distance, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    match metric {
        Distance::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Distance::Chebyshev => diffs.fold(0.0, f64::max),
    }
}

/// Order documents by ascending distance from `best`; ties by doc id.
pub fn distance_rerank(
    docs: &[(String, [f64; 3])],
    best: &[f64; 3],
    metric: Distance,
) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = docs
        .iter()
        .map(|(d, z)| (d.clone(), distance(metric, best, z)))
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn rrf_score(ranks: &[usize], k: i64) -> f64 {
    ranks.iter().map(|&r| 1.0 / (k as f64 + r as f64)).sum()
}

/// Reciprocal rank fusion of several rankings of one topic. A document
/// missing from a list is given rank `len + 1` in that list.
pub fn rrf_fuse(rankings: &[&ScoredList], k: i64) -> Result<ScoredList> {
    if k <= 0 {
        return Err(Error::Parameter(format!("rrf k must be positive, got {k}")));
    }
    let Some(first) = rankings.first() else {
        return Err(Error::Parameter("rrf needs at least one ranking".into()));
    };
    let positions: Vec<HashMap<&str, usize>> = rankings
        .iter()
        .map(|l| l.doc_ids().enumerate().map(|(i, d)| (d, i + 1)).collect())
        .collect();
    let mut docs: BTreeMap<&str, ()> = BTreeMap::new();
    for l in rankings {
        docs.extend(l.doc_ids().map(|d| (d, ())));
    }
    let entries = docs
        .keys()
        .map(|&d| {
            let ranks: Vec<usize> = rankings
                .iter()
                .zip(&positions)
                .map(|(l, p)| p.get(d).copied().unwrap_or(l.len() + 1))
                .collect();
            (d.to_owned(), rrf_score(&ranks, k))
        })
        .collect();
    let depth = rankings.iter().map(|l| l.len()).max().unwrap_or(0);
    Ok(ScoredList::from_unsorted(first.topic_id, entries, depth))
}

/// Raw scores of one aspect keyed by (topic, doc).
pub type AspectScores = HashMap<(u32, String), f64>;

/// Raw and standardized aspect scores of the documents in one topic's
/// initial run, in initial-run order.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicMatrix {
    pub topic_id: u32,
    pub doc_ids: Vec<String>,
    /// Per aspect; `None` when no scores were supplied for that aspect.
    pub raw: [Option<Vec<f64>>; 3],
    pub z: [Option<Vec<f64>>; 3],
}

impl TopicMatrix {
    /// Relevance comes from the initial run; the other aspects from the
    /// score maps, which must cover every document of the run.
    pub fn build(
        initial: &ScoredList,
        credibility: Option<&AspectScores>,
        misinformation: Option<&AspectScores>,
    ) -> Result<Self> {
        let doc_ids: Vec<String> = initial.doc_ids().map(str::to_owned).collect();
        let lookup = |scores: Option<&AspectScores>, aspect: Aspect| -> Result<Option<Vec<f64>>> {
            let Some(scores) = scores else {
                return Ok(None);
            };
            doc_ids
                .iter()
                .map(|d| {
                    scores
                        .get(&(initial.topic_id, d.clone()))
                        .copied()
                        .ok_or_else(|| {
                            Error::Recipe(format!(
                                "no {} score for topic {} document {d}",
                                aspect.as_str(),
                                initial.topic_id
                            ))
                        })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some)
        };
        let raw = [
            Some(initial.entries.iter().map(|e| e.1).collect()),
            lookup(credibility, Aspect::Credibility)?,
            lookup(misinformation, Aspect::Misinformation)?,
        ];
        let z = raw.clone().map(|r| r.map(|v| zscore_normalize(&v)));
        Ok(TopicMatrix {
            topic_id: initial.topic_id,
            doc_ids,
            raw,
            z,
        })
    }

    pub fn has(&self, a: Aspect) -> bool {
        self.z[a.index()].is_some()
    }

    /// z-vector of the i-th document; absent aspects read as 0.
    pub fn z_vector(&self, i: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (a, slot) in v.iter_mut().enumerate() {
            if let Some(z) = &self.z[a] {
                *slot = z[i];
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zscores() {
        let z = zscore_normalize(&[1.0, 2.0, 3.0]);
        let expect = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!((z[0] + expect).abs() < 1e-12 && z[1] == 0.0 && (z[2] - expect).abs() < 1e-12);
        assert!((expect - 1.224744871391589).abs() < 1e-12);
        assert_eq!(zscore_normalize(&[5.0, 5.0, 5.0]), vec![0.0; 3]);
        assert_eq!(zscore_normalize(&[4.0]), vec![0.0]);
    }

    #[test]
    fn weighted_examples() {
        assert!((weighted_average(&[1.0, 0.5, 0.2], &[1.0, 1.0, -1.0]) - 1.3).abs() < 1e-12);
        assert!((weighted_average(&[1.0, 0.5, 0.2], &[-1.0, -1.0, 1.0]) + 1.3).abs() < 1e-12);
    }

    #[test]
    fn best_vector_and_distance() {
        let z = [[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]];
        use Orientation::*;
        assert_eq!(best_score_vector(&z, &[Max, Max, Max]), [1.0, 1.0, 1.0]);
        assert_eq!(best_score_vector(&z, &[Max, Max, Min]), [1.0, 1.0, 0.0]);
        let d = distance(Distance::Euclidean, &[1.0; 3], &[0.0; 3]);
        assert!((d - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(distance(Distance::Chebyshev, &[1.0; 3], &[0.0; 3]), 1.0);
        let docs = vec![
            ("b".to_owned(), [0.0; 3]),
            ("a".to_owned(), [2.0; 3]),
            ("c".to_owned(), [1.0; 3]),
        ];
        let order: Vec<String> = distance_rerank(&docs, &[1.0; 3], Distance::Euclidean)
            .into_iter()
            .map(|e| e.0)
            .collect();
        assert_eq!(order, ["c", "a", "b"]);
    }

    #[test]
    fn rrf_examples() {
        assert!((rrf_score(&[1, 1, 1], 60) - 3.0 / 61.0).abs() < 1e-15);
        assert!((rrf_score(&[1, 2, 3], 60) - (1.0 / 61.0 + 1.0 / 62.0 + 1.0 / 63.0)).abs() < 1e-15);
        let l = ScoredList::from_unsorted(
            1,
            vec![("x".into(), 3.0), ("y".into(), 2.0), ("z".into(), 1.0)],
            10,
        );
        let fused = rrf_fuse(&[&l, &l], 60).unwrap();
        assert_eq!(fused.doc_ids().collect::<Vec<_>>(), ["x", "y", "z"]);
        assert!(matches!(rrf_fuse(&[&l], 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn rrf_missing_documents() {
        let a = ScoredList::from_unsorted(1, vec![("x".into(), 2.0), ("y".into(), 1.0)], 10);
        let b = ScoredList::from_unsorted(1, vec![("z".into(), 1.0)], 10);
        let fused = rrf_fuse(&[&a, &b], 60).unwrap();
        let get = |d: &str| fused.entries.iter().find(|e| e.0 == d).unwrap().1;
        assert!((get("x") - (1.0 / 61.0 + 1.0 / 62.0)).abs() < 1e-15);
        assert!((get("z") - (1.0 / 63.0 + 1.0 / 61.0)).abs() < 1e-15);
    }
}
