//! Topic-independent credibility scoring.
//!
//! Each page is described by eleven features: CSS definition count,
//! readability grade, three PageRank values (−1 when unknown) and a
//! one-hot top-level-domain category. Labels on a 1–5 scale are collapsed
//! to binary ({1,2,3} → 0, {4,5} → 1) and four classifiers are combined
//! by soft voting.

pub mod ensemble;
pub mod forest;
pub mod logistic;
pub mod naive_bayes;
pub mod svm;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::path::Path;

pub use ensemble::{soft_vote, EnsembleModel, Member, Vote};

use crate::corpus::features::{extract_features, DocumentFeatures, TldCategory};
use crate::corpus::pagerank::PageRankCache;
use crate::corpus::RawDocument;
use crate::error::{Error, Result};

pub const FEATURE_DIM: usize = 11;
pub const UNKNOWN_SENTINEL: f64 = -1.0;

/// Column names, in feature-vector order before the TLD one-hot block.
pub const NUMERIC_FEATURES: [&str; 5] = [
    "css_definitions",
    "text_readability",
    "pr_rank",
    "page_rank_integer",
    "page_rank_decimal",
];
pub const TLD_FEATURE: &str = "toplevel_domain";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn from_document(f: &DocumentFeatures) -> Self {
        let opt = |v: Option<f64>| v.unwrap_or(UNKNOWN_SENTINEL);
        let mut x = vec![
            f.content.css_definitions as f64,
            f.content.text_readability,
            opt(f.social.pr_rank.map(|r| r as f64)),
            opt(f.social.page_rank_integer.map(f64::from)),
            opt(f.social.page_rank_decimal),
        ];
        x.extend(one_hot(f.social.toplevel_domain));
        FeatureVector(x)
    }

    /// Build from named string columns, as found in feature CSV files.
    /// `unknown` (or `-1`) marks an unknown PageRank value; an absent or
    /// empty column is an error naming every missing field.
    pub fn from_columns(cols: &HashMap<String, String>) -> Result<Self> {
        let mut missing = Vec::new();
        let mut x = Vec::with_capacity(FEATURE_DIM);
        for name in NUMERIC_FEATURES {
            match cols.get(name).map(|s| s.trim()).filter(|s| !s.is_empty()) {
                None => missing.push(name),
                Some("unknown") => x.push(UNKNOWN_SENTINEL),
                Some(v) => x.push(
                    v.parse::<f64>()
                        .map_err(|_| Error::Feature(format!("{name}: {v:?} is not a number")))?,
                ),
            }
        }
        match cols
            .get(TLD_FEATURE)
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
        {
            None => missing.push(TLD_FEATURE),
            Some(v) => {
                let cat = TldCategory::parse(v).ok_or_else(|| {
                    Error::Feature(format!("{TLD_FEATURE}: unknown category {v:?}"))
                })?;
                x.extend(one_hot(cat));
            }
        }
        if !missing.is_empty() {
            return Err(Error::Feature(format!(
                "missing features: {}",
                missing.join(", ")
            )));
        }
        Ok(FeatureVector(x))
    }
}

fn one_hot(cat: TldCategory) -> impl Iterator<Item = f64> {
    TldCategory::ALL
        .into_iter()
        .map(move |c| f64::from(u8::from(c == cat)))
}

/// A 1–5 credibility judgment and its binary class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CredibilityLabel {
    pub raw: u8,
    pub binary: u8,
}

impl CredibilityLabel {
    pub fn new(raw: i64) -> Result<Self> {
        Ok(CredibilityLabel {
            raw: raw as u8,
            binary: map_labels(raw)?,
        })
    }
}

pub fn map_labels(raw: i64) -> Result<u8> {
    match raw {
        1..=3 => Ok(0),
        4 | 5 => Ok(1),
        _ => Err(Error::Label(raw)),
    }
}

/// Per-feature mean and population standard deviation; a constant
/// feature gets std 1 so it standardizes to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[FeatureVector]) -> Self {
        let d = rows.first().map(|r| r.0.len()).unwrap_or(0);
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r.0[j]).sum::<f64>() / n)
            .collect();
        let std = (0..d)
            .map(|j| {
                let var = rows.iter().map(|r| (r.0[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &FeatureVector) -> Vec<f64> {
        x.0.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub features: Vec<FeatureVector>,
    /// Binary labels.
    pub labels: Vec<u8>,
}

impl TrainingSet {
    pub fn push(&mut self, x: FeatureVector, label: CredibilityLabel) {
        self.features.push(x);
        self.labels.push(label.binary);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, keep: impl Fn(usize) -> bool) -> TrainingSet {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        TrainingSet {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// At least two examples of each class and a consistent dimension.
    pub fn check_trainable(&self) -> Result<()> {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        let zeros = self.len() - ones;
        if ones < 2 || zeros < 2 {
            return Err(Error::Training(format!(
                "need at least two examples of each class, got {zeros} negative and {ones} positive"
            )));
        }
        let d = self.features[0].0.len();
        if self.features.iter().any(|f| f.0.len() != d) {
            return Err(Error::Training("feature vectors differ in length".into()));
        }
        Ok(())
    }

    /// Load a training CSV with columns `url,rank,label_raw` followed
    /// optionally by the feature columns. Rows without feature columns
    /// take their features from `pages` (documents keyed by URL).
    pub fn load_csv(path: &Path, pages: Option<(&[RawDocument], &PageRankCache)>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Training(format!("{}: {e}", path.display())))?
            .iter()
            .map(|h| h.trim().to_owned())
            .collect();
        for required in ["url", "rank", "label_raw"] {
            if !headers.iter().any(|h| h == required) {
                return Err(Error::Training(format!(
                    "training file lacks a {required} column"
                )));
            }
        }
        let has_features = NUMERIC_FEATURES
            .iter()
            .chain([&TLD_FEATURE])
            .any(|f| headers.iter().any(|h| h == f));
        let by_url: HashMap<&str, &RawDocument> = pages
            .map(|(docs, _)| docs.iter().map(|d| (d.url.as_str(), d)).collect())
            .unwrap_or_default();

        let mut set = TrainingSet::default();
        for (rowno, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Training(format!("row {}: {e}", rowno + 2)))?;
            let cols: HashMap<String, String> = headers
                .iter()
                .cloned()
                .zip(record.iter().map(str::to_owned))
                .collect();
            let label_raw: i64 = cols["label_raw"]
                .trim()
                .parse()
                .map_err(|_| Error::Training(format!("row {}: bad label_raw", rowno + 2)))?;
            let label = CredibilityLabel::new(label_raw)?;
            let x = if has_features {
                FeatureVector::from_columns(&cols)?
            } else {
                let (_, cache) = pages.ok_or_else(|| {
                    Error::Training(
                        "training file has no feature columns and no pages were supplied".into(),
                    )
                })?;
                let url = cols["url"].trim();
                let doc = by_url.get(url).ok_or_else(|| {
                    Error::Training(format!("no page snapshot for training url {url}"))
                })?;
                FeatureVector::from_document(&extract_features(doc, cache))
            };
            set.push(x, label);
        }
        Ok(set)
    }
}

/// Write per-document features as CSV (the `features` stage output).
pub fn write_features_csv(path: &Path, rows: &[(String, DocumentFeatures)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Feature(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Feature(e.to_string());
    w.write_record([
        "doc_id",
        "url",
        "css_definitions",
        "text_readability",
        "pr_rank",
        "page_rank_integer",
        "page_rank_decimal",
        "toplevel_domain",
        "url_invalid",
        "degenerate_text",
    ])
    .map_err(csv_err)?;
    let unk = |v: Option<String>| v.unwrap_or_else(|| "unknown".to_owned());
    for (url, f) in rows {
        w.write_record([
            f.doc_id.clone(),
            url.clone(),
            f.content.css_definitions.to_string(),
            f.content.text_readability.to_string(),
            unk(f.social.pr_rank.map(|v| v.to_string())),
            unk(f.social.page_rank_integer.map(|v| v.to_string())),
            unk(f.social.page_rank_decimal.map(|v| v.to_string())),
            f.social.toplevel_domain.to_string(),
            f.social.url_invalid.to_string(),
            f.content.degenerate_text.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a features CSV into feature vectors keyed by doc id.
pub fn read_features_csv(path: &Path) -> Result<BTreeMap<String, Result<FeatureVector>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Feature(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Feature(e.to_string()))?;
        let cols: HashMap<String, String> = headers
            .iter()
            .cloned()
            .zip(record.iter().map(str::to_owned))
            .collect();
        let doc_id = cols
            .get("doc_id")
            .cloned()
            .ok_or_else(|| Error::Feature("features file lacks a doc_id column".into()))?;
        out.insert(doc_id, FeatureVector::from_columns(&cols));
    }
    Ok(out)
}

/// Credibility of a document: the ensemble's probability of the credible
/// class. It does not depend on the topic.
pub fn credibility_score(model: &EnsembleModel, features: &FeatureVector) -> Result<f64> {
    model.predict_proba(features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::features::{ContentFeatures, SocialFeatures};

    #[test]
    fn label_mapping() {
        assert_eq!(map_labels(1).unwrap(), 0);
        assert_eq!(map_labels(3).unwrap(), 0);
        assert_eq!(map_labels(4).unwrap(), 1);
        assert_eq!(map_labels(5).unwrap(), 1);
        assert!(matches!(map_labels(6), Err(Error::Label(6))));
        assert!(matches!(map_labels(0), Err(Error::Label(0))));
    }

    #[test]
    fn unknown_pagerank_uses_sentinel() {
        let f = DocumentFeatures {
            doc_id: "d".into(),
            content: ContentFeatures {
                css_definitions: 4,
                text_readability: 9.5,
                degenerate_text: false,
            },
            social: SocialFeatures {
                pr_rank: None,
                page_rank_integer: None,
                page_rank_decimal: None,
                toplevel_domain: TldCategory::Org,
                url_invalid: false,
            },
        };
        let x = FeatureVector::from_document(&f);
        assert_eq!(
            x.0,
            vec![4.0, 9.5, -1.0, -1.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn missing_columns_are_listed() {
        let cols: HashMap<String, String> = [("css_definitions", "3"), ("pr_rank", "")]
            .into_iter()
            .map(|(a, b)| (a.to_owned(), b.to_owned()))
            .collect();
        let err = FeatureVector::from_columns(&cols).unwrap_err().to_string();
        assert!(
            err.contains("text_readability")
                && err.contains("pr_rank")
                && err.contains("toplevel_domain")
        );
    }

    #[test]
    fn constant_features_standardize_to_zero() {
        let rows = vec![FeatureVector(vec![1.0, 5.0]), FeatureVector(vec![3.0, 5.0])];
        let s = Standardizer::fit(&rows);
        assert_eq!(s.transform(&rows[0]), vec![-1.0, 0.0]);
    }

    #[test]
    fn single_class_is_not_trainable() {
        let mut set = TrainingSet::default();
        for i in 0..5 {
            set.push(
                FeatureVector(vec![i as f64]),
                CredibilityLabel::new(5).unwrap(),
            );
        }
        assert!(matches!(
            EnsembleModel::train(&set, 1),
            Err(Error::Training(_))
        ));
    }
}
