//! Per-topic effectiveness measures. Gains are given in rank order; the
//! qrels side supplies the number of relevant documents or the full gain
//! multiset.

/// Average precision over binary gains. Relevant documents that were not
/// retrieved contribute zero precision. `None` when `num_relevant` is 0.
pub fn average_precision(gains: &[bool], num_relevant: usize) -> Option<f64> {
    if num_relevant == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &g) in gains.iter().enumerate() {
        if g {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / num_relevant as f64)
}

/// Precision at rank R; positions past the end of the run count as
/// non-relevant.
pub fn rprec(gains: &[bool], num_relevant: usize) -> Option<f64> {
    if num_relevant == 0 {
        return None;
    }
    let hits = gains.iter().take(num_relevant).filter(|&&g| g).count();
    Some(hits as f64 / num_relevant as f64)
}

pub const DEFAULT_NDCG_DEPTH: usize = 1000;

fn dcg(gains: impl Iterator<Item = f64>, depth: usize) -> f64 {
    gains
        .take(depth)
        .enumerate()
        .map(|(i, g)| g / ((i + 2) as f64).log2())
        .sum()
}

/// nDCG at `depth` with a gain/log2(rank+1) discount. `all_gains` holds the
/// judged gains of the topic (any order). `None` when no gain is positive.
pub fn ndcg(gains: &[f64], all_gains: &[f64], depth: usize) -> Option<f64> {
    let mut ideal: Vec<f64> = all_gains.iter().copied().filter(|&g| g > 0.0).collect();
    if ideal.is_empty() {
        return None;
    }
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg(ideal.into_iter(), depth);
    Some(dcg(gains.iter().copied(), depth) / idcg)
}

/// Mean of per-aspect values.
pub fn cam(per_aspect: &[f64]) -> f64 {
    per_aspect.iter().sum::<f64>() / per_aspect.len() as f64
}

pub const DEFAULT_PERSISTENCE: f64 = 0.95;
pub const DEFAULT_RESIDUAL: f64 = 1e-6;

/// Evaluation depth at which `p^depth` drops below `residual`.
pub fn truncation_depth(p: f64, residual: f64) -> usize {
    (residual.ln() / p.ln()).ceil().max(1.0) as usize
}

/// Rank-biased overlap of two rankings, summed to `depth`.
pub fn rbo(a: &[&str], b: &[&str], p: f64, depth: usize) -> f64 {
    use std::collections::HashSet;
    let (mut seen_a, mut seen_b) = (HashSet::new(), HashSet::new());
    let mut overlap = 0usize;
    let mut sum = 0.0;
    let mut weight = 1.0;
    for d in 0..depth {
        match (a.get(d), b.get(d)) {
            (Some(&x), Some(&y)) if x == y => overlap += 1,
            (x, y) => {
                if x.is_some_and(|x| seen_b.contains(x)) {
                    overlap += 1;
                }
                if y.is_some_and(|y| seen_a.contains(y)) {
                    overlap += 1;
                }
            }
        }
        if let Some(&x) = a.get(d) {
            seen_a.insert(x);
        }
        if let Some(&y) = b.get(d) {
            seen_b.insert(y);
        }
        sum += weight * overlap as f64 / (d + 1) as f64;
        weight *= p;
    }
    (1.0 - p) * sum
}

/// Compatibility of a run with the ideal ranking of the graded `gains`
/// (doc id, gain > 0). The ideal orders documents by descending gain and
/// breaks ties by their position in the run, then by doc id, which makes
/// it the ideal closest to the run. The score is RBO against the ideal,
/// normalized by the ideal's RBO with itself. `None` without positive gains.
pub fn compatibility(run: &[&str], gains: &[(&str, f64)], p: f64, residual: f64) -> Option<f64> {
    use std::collections::HashMap;
    let pos: HashMap<&str, usize> = run.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let mut ideal: Vec<(&str, f64)> = gains.iter().copied().filter(|g| g.1 > 0.0).collect();
    if ideal.is_empty() {
        return None;
    }
    ideal.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| {
                pos.get(a.0)
                    .unwrap_or(&usize::MAX)
                    .cmp(pos.get(b.0).unwrap_or(&usize::MAX))
            })
            .then_with(|| a.0.cmp(b.0))
    });
    let ideal: Vec<&str> = ideal.into_iter().map(|g| g.0).collect();
    let depth = truncation_depth(p, residual);
    let max = rbo(&ideal, &ideal, p, depth);
    Some(rbo(run, &ideal, p, depth) / max)
}
