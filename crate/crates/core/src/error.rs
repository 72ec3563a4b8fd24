use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the retrieval, scoring, fusion and evaluation stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus format error: {0}")]
    CorpusFormat(String),

    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("topic format error: {0}")]
    TopicFormat(String),

    #[error("index format error: {0}")]
    IndexFormat(String),

    #[error("credibility label {0} outside 1..=5")]
    Label(i64),

    #[error("training error: {0}")]
    Training(String),

    #[error("feature error: {0}")]
    Feature(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("stance file error: {0}")]
    Stance(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("recipe error: {0}")]
    Recipe(String),

    #[error("qrels error: {0}")]
    Qrels(String),

    #[error("run file error: {0}")]
    RunFormat(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("pagerank error: {0}")]
    PageRank(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
