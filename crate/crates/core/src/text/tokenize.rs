use std::collections::HashSet;
use std::sync::OnceLock;

use super::porter;

const STOPWORDS_EN: &str = include_str!("stopwords_en.txt");

/// The bundled English stopword list (the Lucene/Anserini default set).
pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_EN
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

pub fn is_stopword(term: &str) -> bool {
    stopwords().contains(term)
}

/// Lowercased alphanumeric runs of `text`, without stopping or stemming.
pub fn raw_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Index/query analysis: lowercase, split on non-alphanumerics, drop
/// stopwords, Porter-stem.
pub fn tokenize(text: &str) -> Vec<String> {
    raw_tokens(text)
        .filter(|t| !is_stopword(t))
        .map(|t| porter::stem(&t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stops_and_stems() {
        assert_eq!(tokenize("The Running cats"), vec!["run", "cat"]);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn splits_on_hyphen() {
        assert_eq!(tokenize("COVID-19"), vec!["covid", "19"]);
    }

    #[test]
    fn stopword_list_is_the_lucene_default() {
        assert_eq!(stopwords().len(), 33);
        assert!(is_stopword("the") && is_stopword("not") && !is_stopword("cat"));
    }
}
