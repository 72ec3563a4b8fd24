//! Text analysis: HTML extraction, sentence segmentation, tokenization.

pub mod html;
pub mod porter;
pub mod tokenize;

pub use html::{extract, Extraction};
pub use tokenize::{is_stopword, raw_tokens, tokenize};
