//! Declarative run recipes: which initial run to start from and how to
//! re-rank its head.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    best_score_vector, distance, rrf_fuse, weighted_average, Aspect, PerAspect, TopicMatrix,
    DEFAULT_RRF_K,
};
use crate::corpus::QueryFields;
use crate::error::{Error, Result};
use crate::retrieval::RetrievalModel;
use crate::trec::ScoredList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    TotalRecall,
    Adhoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    WeightedAverage,
    DistanceBest,
    Rrf,
    SingleAspect,
    Baseline,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::WeightedAverage => "weighted_average",
            Strategy::DistanceBest => "distance_best",
            Strategy::Rrf => "rrf",
            Strategy::SingleAspect => "single_aspect",
            Strategy::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Euclidean,
    Chebyshev,
}

fn default_rrf_k() -> i64 {
    DEFAULT_RRF_K
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionRecipe {
    pub run_id: String,
    pub task: Task,
    /// Initial retrieval model; absent for fusion of other runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<RetrievalModel>,
    #[serde(default)]
    pub query_fields: QueryFields,
    /// Size of the re-ranked head; `None` re-ranks the whole run.
    #[serde(default)]
    pub cutoff: Option<usize>,
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<PerAspect<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<PerAspect<Orientation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<Distance>,
    #[serde(default = "default_rrf_k")]
    pub rrf_k: i64,
    /// Aspects whose z-scores are multiplied by −1 before the strategy.
    #[serde(default)]
    pub reverse: PerAspect<bool>,
    /// The aspect used by `single_aspect`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect: Option<Aspect>,
    /// Runs combined by `rrf`, by run id.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fuse_runs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl FusionRecipe {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Recipe(format!("{}: {msg}", self.run_id)));
        if self.run_id.trim().is_empty() || self.run_id.contains(char::is_whitespace) {
            return Err(Error::Recipe(format!("invalid run id {:?}", self.run_id)));
        }
        if self.cutoff == Some(0) {
            return fail("cutoff must be positive");
        }
        match self.strategy {
            Strategy::Rrf => {
                if self.fuse_runs.len() < 2 {
                    return fail("rrf needs at least two runs in fuse_runs");
                }
                if self.rrf_k <= 0 {
                    return fail("rrf_k must be positive");
                }
                return Ok(());
            }
            Strategy::WeightedAverage if self.weights.is_none() => {
                return fail("weighted_average needs weights")
            }
            Strategy::DistanceBest if self.orientation.is_none() || self.distance.is_none() => {
                return fail("distance_best needs orientation and distance")
            }
            Strategy::SingleAspect if self.aspect.is_none() => {
                return fail("single_aspect needs an aspect")
            }
            _ => {}
        }
        if self.model.is_none() {
            return fail("an initial retrieval model is required");
        }
        if !self.fuse_runs.is_empty() {
            return fail("fuse_runs is only meaningful for rrf");
        }
        Ok(())
    }

    /// Aspects the strategy reads, besides relevance from the initial run.
    pub fn required_aspects(&self) -> Vec<Aspect> {
        match self.strategy {
            Strategy::Baseline | Strategy::Rrf => Vec::new(),
            Strategy::SingleAspect => self.aspect.into_iter().collect(),
            Strategy::DistanceBest => Aspect::ALL.to_vec(),
            Strategy::WeightedAverage => {
                let w = self.weights.unwrap_or_default();
                Aspect::ALL
                    .into_iter()
                    .filter(|&a| w.get(a) != 0.0)
                    .collect()
            }
        }
    }

    /// SHA-256 of the recipe's canonical JSON form.
    pub fn digest(&self) -> String {
        crate::codec::sha256_hex(&serde_json::to_vec(self).expect("recipe serializes"))
    }
}

/// Parse a JSON array of recipes, checking each one, run-id uniqueness,
/// and that fused runs are defined earlier in the file.
pub fn parse_recipes(text: &str) -> Result<Vec<FusionRecipe>> {
    let recipes: Vec<FusionRecipe> =
        serde_json::from_str(text).map_err(|e| Error::Recipe(e.to_string()))?;
    let mut seen = HashSet::new();
    for r in &recipes {
        r.validate()?;
        for dep in &r.fuse_runs {
            if !seen.contains(dep.as_str()) {
                return Err(Error::Recipe(format!(
                    "{}: fuses {dep}, which is not defined before it",
                    r.run_id
                )));
            }
        }
        if !seen.insert(r.run_id.as_str()) {
            return Err(Error::Recipe(format!("duplicate run id {}", r.run_id)));
        }
    }
    Ok(recipes)
}

pub fn load_recipes(path: &Path) -> Result<Vec<FusionRecipe>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_recipes(&text)
}

/// Re-rank one topic of an initial run. The head (the first `cutoff`
/// documents) is ordered by the strategy; the tail keeps its initial
/// order. Scores in the output are synthetic and strictly decreasing
/// (list length down to 1), except for `baseline`, which returns the
/// initial run unchanged.
pub fn apply_recipe(
    recipe: &FusionRecipe,
    initial: &ScoredList,
    matrix: &TopicMatrix,
) -> Result<ScoredList> {
    match recipe.strategy {
        Strategy::Baseline => return Ok(initial.clone()),
        Strategy::Rrf => {
            return Err(Error::Recipe(format!(
                "{}: rrf recipes combine runs; use fuse_runs",
                recipe.run_id
            )))
        }
        _ => {}
    }
    if matrix.topic_id != initial.topic_id
        || !matrix
            .doc_ids
            .iter()
            .map(String::as_str)
            .eq(initial.doc_ids())
    {
        return Err(Error::Recipe(format!(
            "{}: aspect matrix does not match the initial run of topic {}",
            recipe.run_id, initial.topic_id
        )));
    }
    for a in recipe.required_aspects() {
        if !matrix.has(a) {
            return Err(Error::Recipe(format!(
                "{}: needs {} scores",
                recipe.run_id,
                a.as_str()
            )));
        }
    }

    let reverse = recipe.reverse.to_array();
    let z: Vec<[f64; 3]> = (0..matrix.len())
        .map(|i| {
            let mut v = matrix.z_vector(i);
            for a in 0..3 {
                if reverse[a] {
                    v[a] = super::reverse_aspect(v[a]);
                }
            }
            v
        })
        .collect();

    let head_len = recipe.cutoff.unwrap_or(usize::MAX).min(initial.len());
    // Higher key ranks first.
    let keys: Vec<f64> = match recipe.strategy {
        Strategy::WeightedAverage => {
            let w = recipe.weights.expect("validated").to_array();
            z[..head_len]
                .iter()
                .map(|v| weighted_average(v, &w))
                .collect()
        }
        Strategy::SingleAspect => {
            let a = recipe.aspect.expect("validated").index();
            z[..head_len].iter().map(|v| v[a]).collect()
        }
        Strategy::DistanceBest => {
            let best = best_score_vector(&z, &recipe.orientation.expect("validated").to_array());
            let metric = recipe.distance.expect("validated");
            z[..head_len]
                .iter()
                .map(|v| -distance(metric, &best, v))
                .collect()
        }
        Strategy::Baseline | Strategy::Rrf => unreachable!(),
    };

    let mut head: Vec<usize> = (0..head_len).collect();
    head.sort_by(|&i, &j| {
        keys[j]
            .total_cmp(&keys[i])
            .then_with(|| initial.entries[i].0.cmp(&initial.entries[j].0))
    });
    let n = initial.len();
    let entries = head
        .into_iter()
        .chain(head_len..n)
        .enumerate()
        .map(|(rank, i)| (initial.entries[i].0.clone(), (n - rank) as f64))
        .collect();
    Ok(ScoredList {
        topic_id: initial.topic_id,
        entries,
    })
}

/// Fuse the same topic of several runs according to an `rrf` recipe.
pub fn fuse_recipe_runs(recipe: &FusionRecipe, inputs: &[&ScoredList]) -> Result<ScoredList> {
    if recipe.strategy != Strategy::Rrf {
        return Err(Error::Recipe(format!(
            "{} is not an rrf recipe",
            recipe.run_id
        )));
    }
    rrf_fuse(inputs, recipe.rrf_k)
}
