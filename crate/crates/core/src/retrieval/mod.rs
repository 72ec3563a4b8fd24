//! Relevance retrieval: BM25 and RM3 pseudo-relevance feedback over an
//! [`IndexedCorpus`].

pub mod index;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

pub use index::{IndexedCorpus, Posting};

use crate::events;
use crate::text::tokenize;
pub use crate::trec::ScoredList;

pub const DEFAULT_DEPTH: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RetrievalModel {
    Bm25,
    Rm3,
}

impl RetrievalModel {
    pub fn as_str(self) -> &'static str {
        match self {
            RetrievalModel::Bm25 => "bm25",
            RetrievalModel::Rm3 => "rm3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub topic_id: u32,
    pub text: String,
    pub model: RetrievalModel,
    pub k_docs: usize,
}

impl QuerySpec {
    pub fn new(topic_id: u32, text: impl Into<String>, model: RetrievalModel) -> Self {
        QuerySpec {
            topic_id,
            text: text.into(),
            model,
            k_docs: DEFAULT_DEPTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 0.9, b: 0.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rm3Params {
    pub fb_terms: usize,
    pub fb_docs: usize,
    pub original_query_weight: f64,
    /// Dirichlet prior for the second-pass query likelihood.
    pub mu: f64,
}

impl Default for Rm3Params {
    fn default() -> Self {
        Rm3Params {
            fb_terms: 10,
            fb_docs: 10,
            original_query_weight: 0.5,
            mu: 1000.0,
        }
    }
}

/// Analyzed query terms with their multiplicities, restricted to terms in
/// the index vocabulary.
fn query_term_counts(index: &IndexedCorpus, text: &str) -> BTreeMap<u32, u32> {
    let mut counts = BTreeMap::new();
    for t in tokenize(text) {
        if let Some(id) = index.term_id(&t) {
            *counts.entry(id).or_default() += 1;
        }
    }
    counts
}

/// Lucene-style BM25 idf.
pub fn bm25_idf(n: usize, df: usize) -> f64 {
    let (n, df) = (n as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

pub fn bm25_search(index: &IndexedCorpus, q: &QuerySpec) -> ScoredList {
    bm25_search_with(index, q, Bm25Params::default())
}

/// BM25 with `score(d) = Σ idf(t) · tf / (tf + k1·(1 − b + b·dl/avgdl))`,
/// summed over query tokens (a repeated query term counts repeatedly).
pub fn bm25_search_with(index: &IndexedCorpus, q: &QuerySpec, params: Bm25Params) -> ScoredList {
    if tokenize(&q.text).is_empty() {
        events::emit("empty_query", json!({"topic_id": q.topic_id}));
        return ScoredList::new(q.topic_id);
    }
    let terms = query_term_counts(index, &q.text);
    let n = index.num_docs();
    let avgdl = index.avgdl();
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (&tid, &qtf) in &terms {
        let idf = bm25_idf(n, index.doc_freq(tid));
        for p in index.postings(tid) {
            let dl = index.doc_length(p.doc) as f64;
            let tf = p.tf as f64;
            let norm = params.k1 * (1.0 - params.b + params.b * dl / avgdl);
            *acc.entry(p.doc).or_default() += qtf as f64 * idf * tf / (tf + norm);
        }
    }
    let entries = acc
        .into_iter()
        .map(|(ord, s)| (index.doc_id(ord).to_owned(), s))
        .collect();
    ScoredList::from_unsorted(q.topic_id, entries, q.k_docs)
}

/// A weighted query language model over term ids.
pub type QueryModel = BTreeMap<u32, f64>;

/// Query likelihood with Dirichlet smoothing:
/// `score(d) = Σ_t q(t) · ln((tf + μ·P(t|C)) / (dl + μ))`, over documents
/// containing at least one term with nonzero weight.
pub fn query_likelihood(
    index: &IndexedCorpus,
    topic_id: u32,
    model: &QueryModel,
    mu: f64,
    k: usize,
) -> ScoredList {
    let total = index.total_terms() as f64;
    let active: Vec<(u32, f64)> = model
        .iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(&t, &w)| (t, w))
        .collect();
    let mut candidates: BTreeMap<u32, ()> = BTreeMap::new();
    for &(tid, _) in &active {
        for p in index.postings(tid) {
            candidates.insert(p.doc, ());
        }
    }
    let coll_prob: Vec<f64> = active
        .iter()
        .map(|&(tid, _)| index.coll_freq(tid) as f64 / total)
        .collect();
    let entries = candidates
        .into_keys()
        .map(|ord| {
            let dl = index.doc_length(ord) as f64;
            let terms = index.doc_terms(ord);
            let score: f64 = active
                .iter()
                .zip(&coll_prob)
                .map(|(&(tid, w), &pc)| {
                    let tf = terms
                        .binary_search_by_key(&tid, |&(t, _)| t)
                        .map(|i| terms[i].1 as f64)
                        .unwrap_or(0.0);
                    w * ((tf + mu * pc) / (dl + mu)).ln()
                })
                .sum();
            (index.doc_id(ord).to_owned(), score)
        })
        .collect();
    ScoredList::from_unsorted(topic_id, entries, k)
}

/// Maximum-likelihood model of the analyzed query.
pub fn query_mle(index: &IndexedCorpus, text: &str) -> QueryModel {
    let counts = query_term_counts(index, text);
    let total: u32 = counts.values().sum();
    counts
        .into_iter()
        .map(|(t, c)| (t, c as f64 / total as f64))
        .collect()
}

/// Relevance model from a first-pass ranking: `P_fb(t) ∝ Σ_d P(t|d)·w(d)`
/// with `w(d)` the first-pass scores normalized to sum to one over the
/// feedback documents. Truncated to the `fb_terms` heaviest terms (ties
/// by term id) and renormalized.
pub fn relevance_model(
    index: &IndexedCorpus,
    first_pass: &ScoredList,
    params: &Rm3Params,
) -> QueryModel {
    let feedback: Vec<&(String, f64)> = first_pass.entries.iter().take(params.fb_docs).collect();
    let score_sum: f64 = feedback.iter().map(|(_, s)| s).sum();
    let mut weights: BTreeMap<u32, f64> = BTreeMap::new();
    for (doc_id, score) in feedback {
        let Some(ord) = index.doc_ordinal(doc_id) else {
            continue;
        };
        let dl = index.doc_length(ord) as f64;
        if dl == 0.0 {
            continue;
        }
        let doc_weight = if score_sum > 0.0 {
            score / score_sum
        } else {
            1.0 / params.fb_docs.min(first_pass.len()) as f64
        };
        for &(tid, tf) in index.doc_terms(ord) {
            *weights.entry(tid).or_default() += tf as f64 / dl * doc_weight;
        }
    }
    let mut ranked: Vec<(u32, f64)> = weights.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(params.fb_terms);
    let total: f64 = ranked.iter().map(|(_, w)| w).sum();
    ranked
        .into_iter()
        .filter(|_| total > 0.0)
        .map(|(t, w)| (t, w / total))
        .collect()
}

/// Interpolate the original query model with the relevance model.
pub fn expand_query(
    original: &QueryModel,
    feedback: &QueryModel,
    original_weight: f64,
) -> QueryModel {
    if feedback.is_empty() {
        return original.clone();
    }
    let mut out = QueryModel::new();
    for (&t, &w) in original {
        *out.entry(t).or_default() += original_weight * w;
    }
    for (&t, &w) in feedback {
        *out.entry(t).or_default() += (1.0 - original_weight) * w;
    }
    out
}

pub fn rm3_search(index: &IndexedCorpus, q: &QuerySpec) -> ScoredList {
    rm3_search_with(index, q, Rm3Params::default())
}

/// RM3: BM25 first pass, relevance model from the top `fb_docs`, then
/// Dirichlet query likelihood with the expanded query.
pub fn rm3_search_with(index: &IndexedCorpus, q: &QuerySpec, params: Rm3Params) -> ScoredList {
    let first = bm25_search_with(
        index,
        &QuerySpec {
            k_docs: q.k_docs.max(params.fb_docs),
            ..q.clone()
        },
        Bm25Params::default(),
    );
    if first.is_empty() {
        return ScoredList::new(q.topic_id);
    }
    let original = query_mle(index, &q.text);
    let feedback = relevance_model(index, &first, &params);
    let expanded = expand_query(&original, &feedback, params.original_query_weight);
    query_likelihood(index, q.topic_id, &expanded, params.mu, q.k_docs)
}

pub fn search(index: &IndexedCorpus, q: &QuerySpec) -> ScoredList {
    match q.model {
        RetrievalModel::Bm25 => bm25_search(index, q),
        RetrievalModel::Rm3 => rm3_search(index, q),
    }
}
