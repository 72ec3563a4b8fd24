//! Pipeline configuration (TOML) and the output directory layout.

use std::path::{Path, PathBuf};

use aspectrank::corpus::QueryFields;
use aspectrank::retrieval::{RetrievalModel, DEFAULT_DEPTH};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    /// Index location; defaults to `index.bin` in the output directory.
    pub index: Option<PathBuf>,
    /// Stance interchange JSONL; documents it does not cover fall back to
    /// the lexical baseline.
    pub stance: Option<PathBuf>,
    pub pagerank_cache: Option<PathBuf>,
    /// Labeled pages for training the credibility model.
    pub training: Option<PathBuf>,
    /// A trained model to use instead of training one.
    pub credibility_model: Option<PathBuf>,
    /// Directory with agree.txt, disagree.txt and negations.txt.
    pub cues: Option<PathBuf>,
    #[serde(default)]
    pub recipes: Vec<PathBuf>,
    /// Combined qrels file, or a directory of per-mapping `<name>.qrels` files.
    pub qrels: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub seed: u64,
    pub ndcg_depth: Option<usize>,
    pub compatibility_persistence: Option<f64>,
    pub compatibility_residual: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            topics: None,
            index: None,
            stance: None,
            pagerank_cache: None,
            training: None,
            credibility_model: None,
            cues: None,
            recipes: Vec::new(),
            qrels: None,
            output_dir: default_output(),
            depth: DEFAULT_DEPTH,
            seed: 0,
            ndcg_depth: None,
            compatibility_persistence: None,
            compatibility_residual: None,
        }
    }
}

impl PipelineConfig {
    /// Read a TOML config. Relative paths are resolved against the
    /// directory containing the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.corpus,
            &mut self.topics,
            &mut self.index,
            &mut self.stance,
            &mut self.pagerank_cache,
            &mut self.training,
            &mut self.credibility_model,
            &mut self.cues,
            &mut self.qrels,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self.recipes.iter_mut().for_each(fix);
        fix(&mut self.output_dir);
    }

    /// An input that must be configured and exist.
    pub fn input<'a>(&self, name: &str, value: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
        let p = value
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("no {name} path given (flag or config)")))?;
        require_exists(name, p)?;
        Ok(p)
    }

    pub fn index_path(&self) -> PathBuf {
        self.index.clone().unwrap_or_else(|| self.layout().index())
    }

    pub fn model_path(&self) -> PathBuf {
        self.credibility_model
            .clone()
            .unwrap_or_else(|| self.layout().model())
    }

    pub fn layout(&self) -> Layout {
        Layout {
            root: self.output_dir.clone(),
        }
    }

    pub fn eval_params(&self) -> aspectrank::eval::EvalParams {
        let d = aspectrank::eval::EvalParams::default();
        aspectrank::eval::EvalParams {
            ndcg_depth: self.ndcg_depth.unwrap_or(d.ndcg_depth),
            persistence: self.compatibility_persistence.unwrap_or(d.persistence),
            residual: self.compatibility_residual.unwrap_or(d.residual),
        }
    }
}

pub fn require_exists(name: &str, p: &Path) -> Result<(), CliError> {
    if p.exists() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{name} not found: {}",
            p.display()
        )))
    }
}

/// Where each stage reads and writes inside the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn index(&self) -> PathBuf {
        self.root.join("index.bin")
    }

    pub fn features(&self) -> PathBuf {
        self.root.join("features.csv")
    }

    pub fn model(&self) -> PathBuf {
        self.root.join("credibility.model")
    }

    pub fn initial_dir(&self) -> PathBuf {
        self.root.join("initial")
    }

    pub fn initial_run(&self, model: RetrievalModel, fields: QueryFields) -> PathBuf {
        self.initial_dir()
            .join(format!("{}.{}.trec", model.as_str(), fields.as_str()))
    }

    pub fn scores_dir(&self) -> PathBuf {
        self.root.join("scores")
    }

    pub fn relevance_scores(&self, model: RetrievalModel, fields: QueryFields) -> PathBuf {
        self.scores_dir().join(format!(
            "relevance.{}.{}.jsonl",
            model.as_str(),
            fields.as_str()
        ))
    }

    pub fn credibility_scores(&self) -> PathBuf {
        self.scores_dir().join("credibility.jsonl")
    }

    pub fn misinformation_scores(&self) -> PathBuf {
        self.scores_dir().join("misinformation.jsonl")
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.root.join("runs")
    }

    pub fn run(&self, run_id: &str) -> PathBuf {
        self.runs_dir().join(format!("{run_id}.trec"))
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn eval_dir(&self) -> PathBuf {
        self.root.join("eval")
    }
}
