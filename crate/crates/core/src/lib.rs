//! Multi-aspect retrieval and re-ranking.
//!
//! The crate covers three stages and their evaluation:
//!
//! 1. relevance retrieval with BM25 or RM3 over an inverted index ([`retrieval`]),
//! 2. per-document credibility ([`credibility`]) and per-topic misinformation
//!    ([`misinfo`]) scores,
//! 3. fusion of the three aspects into a final ranking ([`fusion`]),
//!
//! plus multi-aspect measures over TREC-style qrels ([`eval`]).

pub mod codec;
pub mod corpus;
pub mod credibility;
pub mod error;
pub mod eval;
pub mod events;
pub mod fusion;
pub mod misinfo;
pub mod retrieval;
pub mod text;
pub mod trec;

pub use error::{Error, Result};
