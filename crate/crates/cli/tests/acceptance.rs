//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use aspectrank::corpus::{ParsedDocument, QueryFields};
use aspectrank::credibility::ensemble::cross_validate;
use aspectrank::credibility::{
    logistic, map_labels, soft_vote, CredibilityLabel, FeatureVector, TrainingSet,
};
use aspectrank::eval::qrels::{mapping_by_id, AspectLabels};
use aspectrank::eval::{self, average_precision, ndcg, rprec, AspectQrels, EvalParams, Measure};
use aspectrank::events;
use aspectrank::fusion::recipe::load_recipes;
use aspectrank::fusion::{
    apply_recipe, distance, reverse_aspect, rrf_fuse, rrf_score, weighted_average,
    zscore_normalize, Aspect, AspectScores, Distance, FusionRecipe, Orientation, PerAspect,
    Strategy, Task, TopicMatrix,
};
use aspectrank::misinfo::{misinformation_score, StanceProbabilities};
use aspectrank::retrieval::{
    bm25_search, expand_query, query_mle, relevance_model, rm3_search, IndexedCorpus,
};
use aspectrank::retrieval::{QuerySpec, RetrievalModel, Rm3Params};
use aspectrank::text::tokenize;
use aspectrank::trec::{Run, ScoredList};
use aspectrank_cli::{stages, PipelineConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

const TOL: f64 = 1e-9;
const INSTANCES: usize = 100;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64, what: &str) -> Check {
    ensure((got - want).abs() <= TOL * want.abs().max(1.0), || {
        format!("{what}: got {got}, expected {want}")
    })
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

// ---------------------------------------------------------------- oracles

const WORDS: [&str; 12] = [
    "cat", "dog", "sun", "tree", "moon", "fish", "bird", "rock", "lake", "wind", "star", "rain",
];

struct Instance {
    ids: Vec<String>,
    tokens: Vec<Vec<String>>,
    index: IndexedCorpus,
    query: String,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let vocab = &WORDS[..rng.gen_range(3..=WORDS.len())];
    let n = rng.gen_range(2..=20);
    let mut docs = Vec::new();
    for i in 0..n {
        let len = rng.gen_range(1..=15);
        let text: Vec<&str> = (0..len).map(|_| *vocab.choose(rng).unwrap()).collect();
        docs.push(ParsedDocument {
            doc_id: format!("d{i:02}"),
            url: String::new(),
            text: text.join(" "),
            sentences: Vec::new(),
        });
    }
    let qlen = rng.gen_range(1..=4);
    let mut q: Vec<&str> = (0..qlen).map(|_| *WORDS.choose(rng).unwrap()).collect();
    if rng.gen_bool(0.2) {
        q.push("zebra");
    }
    Instance {
        ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
        tokens: docs.iter().map(|d| tokenize(&d.text)).collect(),
        index: IndexedCorpus::build(docs).unwrap(),
        query: q.join(" "),
    }
}

fn tf(doc: &[String], t: &str) -> usize {
    doc.iter().filter(|w| *w == t).count()
}

fn query_counts(query: &str) -> BTreeMap<String, usize> {
    let mut c = BTreeMap::new();
    for t in tokenize(query) {
        *c.entry(t).or_default() += 1;
    }
    c
}

/// BM25 straight from term counts; `None` for documents without any
/// query term.
fn bm25_oracle(inst: &Instance, k1: f64, b: f64) -> Vec<Option<f64>> {
    let n = inst.tokens.len() as f64;
    let avgdl = inst.tokens.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let q = query_counts(&inst.query);
    inst.tokens
        .iter()
        .map(|doc| {
            let dl = doc.len() as f64;
            let mut score = 0.0;
            let mut matched = false;
            for (t, &qtf) in &q {
                let f = tf(doc, t) as f64;
                if f == 0.0 {
                    continue;
                }
                matched = true;
                let df = inst.tokens.iter().filter(|d| tf(d, t) > 0).count() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                let norm = k1 * (1.0 - b + b * dl / avgdl);
                score += qtf as f64 * idf * f / (f + norm);
            }
            matched.then_some(score)
        })
        .collect()
}

fn ranked(inst: &Instance, scores: &[Option<f64>]) -> Vec<(usize, f64)> {
    let mut r: Vec<(usize, f64)> = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s)))
        .collect();
    r.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| inst.ids[a.0].cmp(&inst.ids[b.0]))
    });
    r
}

/// Expanded query model and its Dirichlet query-likelihood scores.
fn rm3_oracle(inst: &Instance, p: &Rm3Params) -> (BTreeMap<String, f64>, Vec<Option<f64>>) {
    let first = ranked(inst, &bm25_oracle(inst, 0.9, 0.4));
    let fb: Vec<&(usize, f64)> = first.iter().take(p.fb_docs).collect();
    let sum: f64 = fb.iter().map(|(_, s)| s).sum();
    let mut rel: BTreeMap<String, f64> = BTreeMap::new();
    for &&(i, s) in &fb {
        let doc = &inst.tokens[i];
        let dl = doc.len() as f64;
        let w = s / sum;
        let distinct: BTreeSet<&String> = doc.iter().collect();
        for t in distinct {
            *rel.entry(t.clone()).or_default() += tf(doc, t) as f64 / dl * w;
        }
    }
    let mut top: Vec<(String, f64)> = rel.into_iter().collect();
    top.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top.truncate(p.fb_terms);
    let total: f64 = top.iter().map(|t| t.1).sum();

    let vocab: BTreeSet<&String> = inst.tokens.iter().flatten().collect();
    let q: BTreeMap<String, usize> = query_counts(&inst.query)
        .into_iter()
        .filter(|(t, _)| vocab.contains(t))
        .collect();
    let qn: usize = q.values().sum();
    let mut model: BTreeMap<String, f64> = BTreeMap::new();
    for (t, c) in &q {
        *model.entry(t.clone()).or_default() += p.original_query_weight * (*c as f64 / qn as f64);
    }
    for (t, w) in &top {
        *model.entry(t.clone()).or_default() += (1.0 - p.original_query_weight) * (w / total);
    }

    let coll: f64 = inst.tokens.iter().map(Vec::len).sum::<usize>() as f64;
    let scores = inst
        .tokens
        .iter()
        .map(|doc| {
            if !model.iter().any(|(t, &w)| w > 0.0 && tf(doc, t) > 0) {
                return None;
            }
            let dl = doc.len() as f64;
            Some(
                model
                    .iter()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(t, w)| {
                        let cf = inst.tokens.iter().map(|d| tf(d, t)).sum::<usize>() as f64;
                        w * ((tf(doc, t) as f64 + p.mu * cf / coll) / (dl + p.mu)).ln()
                    })
                    .sum(),
            )
        })
        .collect();
    (model, scores)
}

fn compare_list(inst: &Instance, list: &ScoredList, want: &[Option<f64>], what: &str) -> Check {
    let expected = want.iter().filter(|s| s.is_some()).count();
    ensure(list.len() == expected, || {
        format!(
            "{what}: {} scored documents, expected {expected}",
            list.len()
        )
    })?;
    for (d, s) in &list.entries {
        let i = inst.ids.iter().position(|x| x == d).unwrap();
        let w = want[i].ok_or_else(|| format!("{what}: {d} should not be scored"))?;
        close(*s, w, &format!("{what} {d}"))?;
    }
    Ok(())
}

fn ap_oracle(rel: &[bool], r: usize) -> f64 {
    let mut sum = 0.0;
    for k in 0..rel.len() {
        if rel[k] {
            let hits = rel[..=k].iter().filter(|&&x| x).count();
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    sum / r as f64
}

fn formula_oracles() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..INSTANCES {
        let inst = random_instance(&mut rng);
        let q = QuerySpec::new(1, inst.query.clone(), RetrievalModel::Bm25);
        compare_list(
            &inst,
            &bm25_search(&inst.index, &q),
            &bm25_oracle(&inst, 0.9, 0.4),
            &format!("bm25 #{case}"),
        )?;

        let params = Rm3Params::default();
        let (want_model, want_scores) = rm3_oracle(&inst, &params);
        let first = bm25_search(&inst.index, &q);
        if !first.is_empty() {
            let fb = relevance_model(&inst.index, &first, &params);
            let got = expand_query(
                &query_mle(&inst.index, &inst.query),
                &fb,
                params.original_query_weight,
            );
            let got: BTreeMap<String, f64> = got
                .into_iter()
                .map(|(t, w)| (inst.index.term(t).to_owned(), w))
                .collect();
            ensure(got.keys().eq(want_model.keys()), || {
                format!("rm3 #{case}: expansion terms {got:?} vs {want_model:?}")
            })?;
            for (t, w) in &want_model {
                close(got[t], *w, &format!("rm3 #{case} weight of {t}"))?;
            }
            let mut rq = q.clone();
            rq.model = RetrievalModel::Rm3;
            compare_list(
                &inst,
                &rm3_search(&inst.index, &rq),
                &want_scores,
                &format!("rm3 #{case}"),
            )?;
        }
    }

    for case in 0..INSTANCES {
        let n = rng.gen_range(1..=20);
        let x: Vec<f64> = if case % 10 == 0 {
            vec![rng.gen_range(-5.0..5.0); n]
        } else {
            (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect()
        };
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let z = zscore_normalize(&x);
        for (i, v) in x.iter().enumerate() {
            let want = if var == 0.0 {
                0.0
            } else {
                (v - mean) / var.sqrt()
            };
            close(z[i], want, "z-score")?;
        }

        let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let b: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let w: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        close(
            weighted_average(&a, &w),
            a[0] * w[0] + a[1] * w[1] + a[2] * w[2],
            "weighted average",
        )?;
        let d: Vec<f64> = (0..3).map(|i| (a[i] - b[i]).abs()).collect();
        close(
            distance(Distance::Euclidean, &a, &b),
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt(),
            "euclidean",
        )?;
        close(
            distance(Distance::Chebyshev, &a, &b),
            d[0].max(d[1]).max(d[2]),
            "chebyshev",
        )?;

        let k = rng.gen_range(1..=100);
        let lists = random_lists(&mut rng);
        let refs: Vec<&ScoredList> = lists.iter().collect();
        let fused = rrf_fuse(&refs, k).map_err(|e| e.to_string())?;
        let mut want: BTreeMap<&str, f64> = BTreeMap::new();
        for l in &lists {
            for d in l.doc_ids() {
                want.entry(d).or_insert(0.0);
            }
        }
        for (d, s) in want.iter_mut() {
            for l in &lists {
                let r = l
                    .doc_ids()
                    .position(|x| x == *d)
                    .map(|p| p + 1)
                    .unwrap_or(l.len() + 1);
                *s += 1.0 / (k as f64 + r as f64);
            }
        }
        let depth = lists.iter().map(ScoredList::len).max().unwrap();
        ensure(fused.len() == depth.min(want.len()), || {
            format!("rrf length {}", fused.len())
        })?;
        for (d, s) in &fused.entries {
            close(*s, want[d.as_str()], &format!("rrf {d}"))?;
        }

        let raw: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
        let sum: f64 = raw.iter().sum();
        let p = StanceProbabilities::new(raw[0] / sum, raw[1] / sum, raw[2] / sum)
            .map_err(|e| e.to_string())?;
        let answer = rng.gen_range(0..=1u8);
        let (correct, wrong) = if answer == 1 {
            (p.p[1], p.p[0])
        } else {
            (p.p[0], p.p[1])
        };
        close(
            misinformation_score(&p, answer),
            wrong - correct,
            "misinformation score",
        )?;

        let len = rng.gen_range(0..=20);
        let rel: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.4)).collect();
        let r = rel.iter().filter(|&&x| x).count() + rng.gen_range(0..=3);
        if r > 0 {
            close(
                average_precision(&rel, r).unwrap(),
                ap_oracle(&rel, r),
                "AP",
            )?;
            let hits = (0..r)
                .filter(|&i| rel.get(i).copied().unwrap_or(false))
                .count();
            close(rprec(&rel, r).unwrap(), hits as f64 / r as f64, "Rprec")?;
        }

        let gains: Vec<f64> = (0..len)
            .map(|_| f64::from(rng.gen_range(0..=3u8)))
            .collect();
        let mut judged: Vec<f64> = gains.clone();
        judged.extend((0..rng.gen_range(0..=3)).map(|_| f64::from(rng.gen_range(1..=3u8))));
        if judged.iter().any(|&g| g > 0.0) {
            let dcg = |g: &[f64]| -> f64 {
                let mut s = 0.0;
                for (i, v) in g.iter().enumerate() {
                    s += v / ((i + 2) as f64).log2();
                }
                s
            };
            let mut ideal = judged.clone();
            ideal.sort_by(|a, b| b.total_cmp(a));
            close(
                ndcg(&gains, &judged, 1000).unwrap(),
                dcg(&gains) / dcg(&ideal),
                "nDCG",
            )?;
        }

        cam_case(&mut rng)?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })
}

fn random_lists(rng: &mut ChaCha8Rng) -> Vec<ScoredList> {
    let pool: Vec<String> = (0..20).map(|i| format!("p{i:02}")).collect();
    (0..rng.gen_range(2..=4))
        .map(|_| {
            let mut docs = pool.clone();
            docs.shuffle(rng);
            docs.truncate(rng.gen_range(1..=20));
            let n = docs.len();
            ScoredList {
                topic_id: 1,
                entries: docs
                    .into_iter()
                    .enumerate()
                    .map(|(i, d)| (d, (n - i) as f64))
                    .collect(),
            }
        })
        .collect()
}

fn cam_case(rng: &mut ChaCha8Rng) -> Check {
    let arity = rng.gen_range(2..=3);
    let mut judged: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for i in 0..rng.gen_range(1..=20) {
        judged.insert(
            format!("j{i:02}"),
            (0..arity).map(|_| rng.gen_range(0..=1)).collect(),
        );
    }
    let mut run: Vec<String> = judged.keys().cloned().collect();
    run.push("unjudged".into());
    run.shuffle(rng);
    run.truncate(rng.gen_range(1..=run.len()));
    let list = ScoredList {
        topic_id: 1,
        entries: run
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), -(i as f64)))
            .collect(),
    };
    let mut aps = Vec::new();
    for j in 0..arity {
        let r = judged.values().filter(|l| l[j] > 0).count();
        let rel: Vec<bool> = run
            .iter()
            .map(|d| judged.get(d).is_some_and(|l| l[j] > 0))
            .collect();
        aps.push((r > 0).then(|| ap_oracle(&rel, r)));
    }
    let want = if aps.iter().all(Option::is_none) {
        None
    } else {
        Some(aps.iter().map(|a| a.unwrap_or(0.0)).sum::<f64>() / arity as f64)
    };
    let got = eval::evaluate_topic(&list, &judged, Measure::CamMap, &EvalParams::default());
    match (got, want) {
        (None, None) => Ok(()),
        (Some(g), Some(w)) => close(g, w, "CAM"),
        _ => Err(format!("CAM: got {got:?}, expected {want:?}")),
    }
}

// ---------------------------------------------------------- hand anchors

fn hand_anchored() -> Check {
    close(rrf_score(&[1, 1, 1], 60), 3.0 / 61.0, "RRF(1,1,1)")?;
    close(
        rrf_score(&[1, 2, 3], 60),
        1.0 / 61.0 + 1.0 / 62.0 + 1.0 / 63.0,
        "RRF(1,2,3)",
    )?;
    let z = zscore_normalize(&[1.0, 2.0, 3.0]);
    close(z[0], -(1.5f64).sqrt(), "z(1)")?;
    close(z[1], 0.0, "z(2)")?;
    close(z[2], (1.5f64).sqrt(), "z(3)")?;
    ensure((z[2] - 1.22474).abs() < 1e-5, || format!("z(3) = {}", z[2]))?;
    let p = StanceProbabilities::new(0.2, 0.7, 0.1).map_err(|e| e.to_string())?;
    close(misinformation_score(&p, 1), -0.5, "misinformation score")?;
    let n = ndcg(&[1.0, 0.0, 1.0], &[1.0, 1.0], 1000).unwrap();
    close(n, 1.5 / (1.0 + 1.0 / 3f64.log2()), "nDCG([1,0,1])")?;
    ensure((n - 0.91972).abs() < 1e-5, || {
        format!("nDCG([1,0,1]) = {n}")
    })?;
    close(
        average_precision(&[true, false, true], 2).unwrap(),
        5.0 / 6.0,
        "AP([1,0,1])",
    )?;
    let zero = [0.0; 3];
    let one = [1.0; 3];
    close(
        distance(Distance::Euclidean, &one, &zero),
        3f64.sqrt(),
        "euclidean",
    )?;
    close(distance(Distance::Chebyshev, &one, &zero), 1.0, "chebyshev")
}

// ------------------------------------------------------ recipe structure

fn parse_aspects(cell: &str) -> BTreeSet<Aspect> {
    if cell == "-" {
        return BTreeSet::new();
    }
    cell.split(',')
        .map(|a| match a {
            "relevance" => Aspect::Relevance,
            "credibility" => Aspect::Credibility,
            "misinformation" => Aspect::Misinformation,
            other => panic!("unknown aspect {other}"),
        })
        .collect()
}

fn check_row(cols: &[&str], r: &FusionRecipe) -> Check {
    let id = cols[1];
    let fail = |field: &str| format!("{id}: {field} differs from the table");
    let task = match cols[0] {
        "total_recall" => Task::TotalRecall,
        _ => Task::Adhoc,
    };
    ensure(r.task == task, || fail("task"))?;
    match cols[2] {
        "-" => ensure(r.model.is_none(), || fail("initial run"))?,
        init => {
            let (m, f) = init.split_once('_').unwrap();
            let model = if m == "BM25" {
                RetrievalModel::Bm25
            } else {
                RetrievalModel::Rm3
            };
            ensure(
                r.model == Some(model) && r.query_fields.as_str() == f,
                || fail("initial run"),
            )?;
        }
    }
    ensure(r.cutoff == cols[3].parse().ok(), || fail("cutoff"))?;
    ensure(r.strategy.as_str() == cols[4], || fail("strategy"))?;
    match cols[5] {
        "-" => ensure(r.weights.is_none(), || fail("weights"))?,
        w => {
            let want: Vec<f64> = w.split('/').map(|v| v.parse().unwrap()).collect();
            let got = r.weights.ok_or_else(|| fail("weights"))?.to_array();
            for (g, w) in got.iter().zip(&want) {
                ensure(g.signum() == w.signum() || (*g == 0.0 && *w == 0.0), || {
                    fail("weight sign")
                })?;
                ensure(g == w, || fail("weight value"))?;
            }
        }
    }
    let dist = r.distance.map(|d| match d {
        Distance::Euclidean => "euclidean",
        Distance::Chebyshev => "chebyshev",
    });
    ensure(dist.unwrap_or("-") == cols[6], || fail("distance"))?;
    if r.strategy == Strategy::DistanceBest {
        let mins = parse_aspects(cols[7]);
        let o = r.orientation.ok_or_else(|| fail("orientation"))?;
        for a in Aspect::ALL {
            let want = if mins.contains(&a) {
                Orientation::Min
            } else {
                Orientation::Max
            };
            ensure(o.get(a) == want, || fail("orientation"))?;
        }
    } else {
        ensure(cols[7] == "-" && r.orientation.is_none(), || {
            fail("orientation")
        })?;
    }
    ensure(
        r.aspect.map(Aspect::as_str).unwrap_or("-") == cols[8],
        || fail("aspect"),
    )?;
    let reversed = parse_aspects(cols[9]);
    for a in Aspect::ALL {
        ensure(r.reverse.get(a) == reversed.contains(&a), || {
            fail("reversal flags")
        })?;
    }
    let fuses: Vec<&str> = if cols[10] == "-" {
        Vec::new()
    } else {
        cols[10].split(',').collect()
    };
    ensure(r.fuse_runs.iter().map(String::as_str).eq(fuses), || {
        fail("fused runs")
    })
}

fn fixture_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(&root().join("fixtures/pipeline.toml")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn recipe_conformance() -> Check {
    let table =
        std::fs::read_to_string(root().join("recipes/tables.tsv")).map_err(|e| e.to_string())?;
    let mut recipes: HashMap<String, FusionRecipe> = HashMap::new();
    for f in ["total_recall.json", "adhoc.json"] {
        for r in load_recipes(&root().join("recipes").join(f)).map_err(|e| e.to_string())? {
            recipes.insert(r.run_id.clone(), r);
        }
    }
    let mut rows = 0;
    let mut counts = BTreeMap::new();
    for line in table.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split('\t').collect();
        ensure(cols.len() == 11, || format!("bad table row {line:?}"))?;
        let r = recipes
            .get(cols[1])
            .ok_or_else(|| format!("no recipe for {}", cols[1]))?;
        check_row(&cols, r)?;
        *counts.entry(cols[0]).or_insert(0) += 1;
        rows += 1;
    }
    ensure(rows == recipes.len(), || {
        format!("{} recipes for {rows} table rows", recipes.len())
    })?;
    ensure(
        counts.get("total_recall") == Some(&11) && counts.get("adhoc") == Some(&13),
        || format!("table rows per task: {counts:?}"),
    )?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = fixture_config(dir.path());
    let (res, _) = events::capture(|| stages::pipeline(&cfg));
    let summary = res.map_err(|e| e.to_string())?;
    let by_task = |t: &str| summary.manifest.runs.iter().filter(|r| r.task == t).count();
    ensure(
        by_task("total_recall") == 11 && by_task("adhoc") == 13,
        || {
            format!(
                "{} total-recall and {} ad-hoc runs",
                by_task("total_recall"),
                by_task("adhoc")
            )
        },
    )?;
    let files = std::fs::read_dir(cfg.layout().runs_dir())
        .map_err(|e| e.to_string())?
        .count();
    ensure(files == 24, || format!("{files} run files written"))
}

// ------------------------------------------------------- label mappings

fn label_mappings() -> Check {
    let q = AspectQrels::load(&root().join("fixtures/qrels.txt")).map_err(|e| e.to_string())?;
    ensure(q.topics.len() == 5, || {
        format!("fixture has {} topics", q.topics.len())
    })?;
    let qs = eval::expand_all(&q);
    let mut run = Run::new("all-judged");
    for (t, docs) in &q.topics {
        let mut ids: Vec<String> = docs.keys().cloned().collect();
        ids.reverse();
        ids.insert(2, "unjudged-doc".into());
        let n = ids.len();
        run.insert(ScoredList {
            topic_id: *t,
            entries: ids
                .into_iter()
                .enumerate()
                .map(|(i, d)| (d, (n - i) as f64))
                .collect(),
        });
    }
    let res = eval::evaluate_run(
        &run,
        &qs,
        eval::qrels::adhoc_mappings(),
        &EvalParams::default(),
    )
    .map_err(|e| e.to_string())?;
    let ids: Vec<u8> = res.iter().filter_map(|r| r.mapping_id).collect();
    ensure(ids == (0..9).collect::<Vec<u8>>(), || {
        format!("mapping ids {ids:?}")
    })?;
    for r in &res {
        ensure(!r.per_topic.is_empty(), || {
            format!("{} evaluated no topic", r.mapping)
        })?;
        ensure(
            r.per_topic
                .values()
                .all(|v| v.is_finite() && (0.0..=1.0 + TOL).contains(v)),
            || format!("{} out of range: {:?}", r.mapping, r.per_topic),
        )?;
    }

    let (g3, g4, g5) = (
        mapping_by_id(3).unwrap(),
        mapping_by_id(4).unwrap(),
        mapping_by_id(5).unwrap(),
    );
    let flags = [None, Some(0), Some(1)];
    let mut labels: Vec<AspectLabels> = Vec::new();
    for useful in 0..=1 {
        for credible in flags {
            for correct in flags {
                labels.push(AspectLabels {
                    useful,
                    credible,
                    correct,
                });
            }
        }
    }
    labels.extend(q.topics.values().flat_map(|d| d.values().copied()));
    for l in &labels {
        let (a, b, c) = (g3.labels(l)[0], g4.labels(l)[0], g5.labels(l)[0]);
        ensure(c <= b && b <= a, || {
            format!("gains {a},{b},{c} not monotone for {l:?}")
        })?;
    }
    Ok(())
}

// ----------------------------------------------------------- invariances

struct Topic {
    initial: ScoredList,
    cred: AspectScores,
    mis: AspectScores,
}

fn random_topic(rng: &mut ChaCha8Rng) -> Topic {
    let n = rng.gen_range(5..=30);
    let entries: Vec<(String, f64)> = (0..n)
        .map(|i| (format!("t{i:02}"), rng.gen_range(0.0..20.0)))
        .collect();
    let initial = ScoredList::from_unsorted(1, entries, n);
    let cred = initial
        .doc_ids()
        .map(|d| ((1, d.to_owned()), rng.gen_range(0.0..1.0)))
        .collect();
    let mis = initial
        .doc_ids()
        .map(|d| ((1, d.to_owned()), rng.gen_range(-1.0..1.0)))
        .collect();
    Topic { initial, cred, mis }
}

fn affine(t: &Topic, a: [f64; 3], b: [f64; 3]) -> Topic {
    let map = |s: &AspectScores, i: usize| {
        s.iter()
            .map(|(k, v)| (k.clone(), a[i] * v + b[i]))
            .collect()
    };
    Topic {
        initial: ScoredList {
            topic_id: 1,
            entries: t
                .initial
                .entries
                .iter()
                .map(|(d, s)| (d.clone(), a[0] * s + b[0]))
                .collect(),
        },
        cred: map(&t.cred, 1),
        mis: map(&t.mis, 2),
    }
}

fn order(r: &FusionRecipe, t: &Topic) -> Result<Vec<String>, String> {
    let m =
        TopicMatrix::build(&t.initial, Some(&t.cred), Some(&t.mis)).map_err(|e| e.to_string())?;
    let out = apply_recipe(r, &t.initial, &m).map_err(|e| e.to_string())?;
    Ok(out.doc_ids().map(str::to_owned).collect())
}

fn invariances() -> Check {
    let mut recipes = Vec::new();
    for f in ["total_recall.json", "adhoc.json"] {
        recipes.extend(load_recipes(&root().join("recipes").join(f)).map_err(|e| e.to_string())?);
    }
    recipes.retain(|r| r.strategy != Strategy::Rrf);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..INSTANCES {
        let t = random_topic(&mut rng);
        let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.5..4.0));
        let b: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        let moved = affine(&t, a, b);
        for r in &recipes {
            let mut r = r.clone();
            r.cutoff = Some(rng.gen_range(1..=t.initial.len()));
            ensure(order(&r, &t)? == order(&r, &moved)?, || {
                format!(
                    "case {case}: {} changes under a positive-affine transform",
                    r.run_id
                )
            })?;

            // Negating the raw scores of an aspect and reversing it cancel.
            let mut flipped = r.clone();
            flipped.reverse = PerAspect::new(
                r.reverse.relevance,
                !r.reverse.credibility,
                r.reverse.misinformation,
            );
            let negated = Topic {
                initial: t.initial.clone(),
                cred: t.cred.iter().map(|(k, v)| (k.clone(), -v)).collect(),
                mis: t.mis.clone(),
            };
            ensure(order(&r, &t)? == order(&flipped, &negated)?, || {
                format!(
                    "case {case}: {} double reversal is not the identity",
                    r.run_id
                )
            })?;
        }

        let lists = random_lists(&mut rng);
        let warped: Vec<ScoredList> = lists
            .iter()
            .map(|l| ScoredList {
                topic_id: 1,
                entries: l
                    .entries
                    .iter()
                    .map(|(d, s)| (d.clone(), (s * 0.3).exp() - 7.0))
                    .collect(),
            })
            .collect();
        let k = rng.gen_range(1..=100);
        let plain = rrf_fuse(&lists.iter().collect::<Vec<_>>(), k).map_err(|e| e.to_string())?;
        let other = rrf_fuse(&warped.iter().collect::<Vec<_>>(), k).map_err(|e| e.to_string())?;
        ensure(plain == other, || {
            format!("case {case}: rrf depends on score values")
        })?;

        let z: f64 = rng.gen_range(-5.0..5.0);
        ensure(reverse_aspect(reverse_aspect(z)) == z, || {
            "reversal is not an involution".into()
        })?;

        let raw: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
        let s: f64 = raw.iter().sum();
        let p = StanceProbabilities::new(raw[0] / s, raw[1] / s, raw[2] / s)
            .map_err(|e| e.to_string())?;
        ensure(
            misinformation_score(&p, 1) == -misinformation_score(&p, 0),
            || "misinformation score is not antisymmetric in the answer".into(),
        )?;

        let x: Vec<f64> = t.initial.entries.iter().map(|e| e.1).collect();
        let zs = zscore_normalize(&x);
        let n = zs.len() as f64;
        let mean = zs.iter().sum::<f64>() / n;
        let sd = (zs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        ensure(mean.abs() < TOL && (sd - 1.0).abs() < TOL, || {
            format!("z-scores mean {mean}, std {sd}")
        })?;
    }
    Ok(())
}

// ------------------------------------------------------------ credibility

fn credibility() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..1000 {
        let members = rng.gen_range(1..=4);
        let dists: Vec<[f64; 2]> = (0..members)
            .map(|_| {
                let p = if case % 5 == 0 {
                    0.5
                } else {
                    rng.gen_range(0.0..1.0)
                };
                [1.0 - p, p]
            })
            .collect();
        let s0: f64 = dists.iter().map(|d| d[0]).sum();
        let s1: f64 = dists.iter().map(|d| d[1]).sum();
        let want = u8::from(s1 > s0);
        let v = soft_vote(&dists);
        ensure(v.class == want, || {
            format!("soft vote {dists:?}: class {}, expected {want}", v.class)
        })?;
    }

    for case in 0..20 {
        let d = rng.gen_range(1..=6);
        let x: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<u8> = (0..30).map(|_| rng.gen_range(0..=1)).collect();
        let theta: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = rng.gen_range(0.1..10.0);
        let g = logistic::gradient(&theta, &x, &y, c);
        for j in 0..=d {
            let h = 1e-6;
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[j] += h;
            down[j] -= h;
            let fd = (logistic::objective(&up, &x, &y, c) - logistic::objective(&down, &x, &y, c))
                / (2.0 * h);
            ensure((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1.0), || {
                format!(
                    "case {case}: gradient {j} is {}, finite difference {fd}",
                    g[j]
                )
            })?;
        }
    }

    // Separable set: every point lies at least 1.0 from the hyperplane.
    let dim = 11;
    let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut set = TrainingSet::default();
    while set.len() < 200 {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let margin = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / norm;
        if margin.abs() < 1.0 {
            continue;
        }
        let raw = if margin > 0.0 { 5 } else { 1 };
        set.push(
            FeatureVector(x),
            CredibilityLabel::new(raw).map_err(|e| e.to_string())?,
        );
    }
    let acc = cross_validate(&set, 5, 7).map_err(|e| e.to_string())?;
    ensure(acc >= 0.95, || format!("cross-validated accuracy {acc}"))?;

    for raw in -3..=9 {
        let want = match raw {
            1..=3 => Some(0),
            4..=5 => Some(1),
            _ => None,
        };
        ensure(map_labels(raw).ok() == want, || {
            format!("label {raw} maps to {:?}", map_labels(raw).ok())
        })?;
    }
    Ok(())
}

// ------------------------------------------------------------ determinism

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for name in ["first", "second"] {
        let out = dir.path().join(name);
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_aspectrank"))
            .arg("--config")
            .arg(root().join("fixtures/pipeline.toml"))
            .arg("--output-dir")
            .arg(&out)
            .arg("pipeline")
            .env("SOURCE_DATE_EPOCH", "1600000000")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        let took = start.elapsed();
        ensure(took < Duration::from_secs(120), || {
            format!("pipeline took {took:?}")
        })?;
        trees.push(tree(&out));
    }
    ensure(trees[0].len() > 24, || {
        format!("only {} files written", trees[0].len())
    })?;
    ensure(trees[0].keys().eq(trees[1].keys()), || {
        "different file sets".into()
    })?;
    for (p, bytes) in &trees[0] {
        ensure(&trees[1][p] == bytes, || {
            format!("{} differs between invocations", p.display())
        })?;
    }
    let topics = QueryFields::Description;
    ensure(
        trees[0].contains_key(&PathBuf::from(format!(
            "initial/bm25.{}.trec",
            topics.as_str()
        ))),
        || "initial run missing".into(),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("formula oracles", formula_oracles),
        ("hand-anchored values", hand_anchored),
        ("recipe conformance", recipe_conformance),
        ("label mappings", label_mappings),
        ("invariances", invariances),
        ("credibility ensemble", credibility),
        ("pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("PASS  {name} ({ms} ms)"),
            Err(e) => {
                failed += 1;
                println!("FAIL  {name} ({ms} ms): {e}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
