//! Content and social credibility features of a web page.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::pagerank::{registrable_domain, PageRankCache};
use super::{ParsedDocument, RawDocument};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentFeatures {
    pub css_definitions: u32,
    /// Flesch-Kincaid grade level of the extracted text.
    pub text_readability: f64,
    /// Set when the text has no words or no sentences.
    pub degenerate_text: bool,
}

/// Top-level-domain category used as a one-hot credibility feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TldCategory {
    Gov,
    Edu,
    Org,
    Com,
    Net,
    Other,
}

impl TldCategory {
    pub const ALL: [TldCategory; 6] = [
        TldCategory::Gov,
        TldCategory::Edu,
        TldCategory::Org,
        TldCategory::Com,
        TldCategory::Net,
        TldCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TldCategory::Gov => "gov",
            TldCategory::Edu => "edu",
            TldCategory::Org => "org",
            TldCategory::Com => "com",
            TldCategory::Net => "net",
            TldCategory::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Category of a public suffix: its first label if that is one of the
    /// five named categories, e.g. `gov` and `gov.uk` are both `Gov`.
    pub fn from_suffix(suffix: &str) -> Self {
        let first = suffix.split('.').next().unwrap_or("");
        match first {
            "gov" => TldCategory::Gov,
            "edu" => TldCategory::Edu,
            "org" => TldCategory::Org,
            "com" => TldCategory::Com,
            "net" => TldCategory::Net,
            _ => TldCategory::Other,
        }
    }
}

impl fmt::Display for TldCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocialFeatures {
    pub pr_rank: Option<u64>,
    pub page_rank_integer: Option<u8>,
    pub page_rank_decimal: Option<f64>,
    pub toplevel_domain: TldCategory,
    pub url_invalid: bool,
}

/// Every credibility feature of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentFeatures {
    pub doc_id: String,
    pub content: ContentFeatures,
    pub social: SocialFeatures,
}

pub fn extract_content_features(doc: &RawDocument, parsed: &ParsedDocument) -> ContentFeatures {
    let extraction = text::extract(&doc.html);
    let css_definitions = extraction
        .style_sheets
        .iter()
        .map(|sheet| count_css_rules(sheet))
        .sum::<usize>()
        + extraction.inline_styles;
    let (text_readability, degenerate_text) =
        match TextCounts::of(&parsed.text, parsed.sentences.len()) {
            Some(counts) => (counts.flesch_kincaid_grade(), false),
            None => (0.0, true),
        };
    ContentFeatures {
        css_definitions: css_definitions as u32,
        text_readability,
        degenerate_text,
    }
}

pub fn extract_social_features(doc: &RawDocument, cache: &PageRankCache) -> SocialFeatures {
    let unknown = SocialFeatures {
        pr_rank: None,
        page_rank_integer: None,
        page_rank_decimal: None,
        toplevel_domain: TldCategory::Other,
        url_invalid: true,
    };
    let Some(host) = url::Url::parse(&doc.url)
        .ok()
        .and_then(|u| u.host_str().map(str::to_ascii_lowercase))
    else {
        return unknown;
    };
    let toplevel_domain = psl::suffix_str(&host)
        .map(TldCategory::from_suffix)
        .unwrap_or(TldCategory::Other);
    let record = registrable_domain(&host).and_then(|d| cache.get(&d));
    SocialFeatures {
        pr_rank: record.and_then(|r| r.pr_rank),
        page_rank_integer: record.and_then(|r| r.page_rank_integer),
        page_rank_decimal: record.and_then(|r| r.page_rank_decimal),
        toplevel_domain,
        url_invalid: false,
    }
}

pub fn extract_features(doc: &RawDocument, cache: &PageRankCache) -> DocumentFeatures {
    let parsed = super::extract_text(doc);
    DocumentFeatures {
        doc_id: doc.doc_id.clone(),
        content: extract_content_features(doc, &parsed),
        social: extract_social_features(doc, cache),
    }
}

/// Count CSS rule blocks: every `{...}` block that holds declarations
/// rather than nested blocks. Comments are ignored, so `@media` wrappers
/// contribute only their inner rules.
pub fn count_css_rules(sheet: &str) -> usize {
    let mut count = 0;
    // One flag per open block: did it contain a nested block?
    let mut stack: Vec<bool> = Vec::new();
    let mut chars = sheet.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = '\0';
                for c in chars.by_ref() {
                    if prev == '*' && c == '/' {
                        break;
                    }
                    prev = c;
                }
            }
            '{' => {
                if let Some(parent) = stack.last_mut() {
                    *parent = true;
                }
                stack.push(false);
            }
            '}' => {
                if let Some(had_nested) = stack.pop() {
                    if !had_nested {
                        count += 1;
                    }
                }
            }
            _ => {}
        }
    }
    count
}

/// Word, sentence and syllable counts for readability formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextCounts {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
}

impl TextCounts {
    /// None when there are no words or no sentences.
    pub fn of(text: &str, sentences: usize) -> Option<Self> {
        let words: Vec<&str> = text
            .split_whitespace()
            .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
            .filter(|w| w.chars().any(char::is_alphanumeric))
            .collect();
        if words.is_empty() || sentences == 0 {
            return None;
        }
        Some(TextCounts {
            words: words.len(),
            sentences,
            syllables: words.iter().map(|w| count_syllables(w)).sum(),
        })
    }

    pub fn flesch_kincaid_grade(&self) -> f64 {
        let words = self.words as f64;
        0.39 * (words / self.sentences as f64) + 11.8 * (self.syllables as f64 / words) - 15.59
    }
}

/// Heuristic syllable count: groups of consecutive vowels (a, e, i, o, u,
/// y), minus one for a silent final `e` (but not `-le` after a consonant),
/// never less than one.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if w.is_empty() {
        return 1;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = w.len();
    if n > 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2]) {
        let consonant_le = w[n - 2] == 'l' && !is_vowel(w[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}
