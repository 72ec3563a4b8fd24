//! Stems checked against a frozen table produced by an independent
//! implementation of the original 1980 algorithm.

use aspectrank::text::porter::stem;

#[test]
fn matches_reference_table() {
    let table = include_str!("data/porter_reference.tsv");
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for line in table.lines() {
        let (word, expected) = line.split_once('\t').unwrap();
        checked += 1;
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: got {got}, expected {expected}"));
        }
    }
    assert!(checked > 1000);
    assert!(
        mismatches.is_empty(),
        "{} mismatches:\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}
