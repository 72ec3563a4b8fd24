//! Pipeline stages. Each stage reads its inputs from files, computes all
//! of its outputs in memory, and writes them only once everything succeeded.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use aspectrank::corpus::features::{extract_features, DocumentFeatures};
use aspectrank::corpus::pagerank::{
    fetch_into_cache, url_domain, FetchConfig, FetchReport, PageRankCache,
};
use aspectrank::corpus::{
    extract_text, ingest_corpus, load_topics, ParsedDocument, QueryFields, RawDocument, Topic,
};
use aspectrank::credibility::{
    credibility_score, read_features_csv, write_features_csv, EnsembleModel, TrainingSet,
};
use aspectrank::eval::{self, qrels, AspectQrels, MappedQrels, MeasureResult, QrelsSet, MAPPINGS};
use aspectrank::events;
use aspectrank::fusion::recipe::{fuse_recipe_runs, load_recipes};
use aspectrank::fusion::{
    apply_recipe, Aspect, AspectScores, FusionRecipe, Strategy, Task, TopicMatrix,
};
use aspectrank::misinfo::{
    lexical_stance, load_external_stance, trim_to_claim, CueLists, ExternalStance, MisinfoScore,
};
use aspectrank::retrieval::{search, IndexedCorpus, QuerySpec, RetrievalModel};
use aspectrank::trec::{Run, ScoredList};
use aspectrank::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{require_exists, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{file_digest, timestamp, RunEntry, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScoreAspect {
    Relevance,
    Credibility,
    Misinfo,
}

/// One line of a score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub topic_id: u32,
    pub doc_id: String,
    pub score: f64,
}

type Scores = BTreeMap<(u32, String), f64>;

fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    with_tmp(path, |tmp| {
        fs::write(tmp, bytes).map_err(|e| Error::io(tmp, e))
    })
}

/// Produce `path` through a temporary sibling, so readers never see a
/// half-written file.
fn with_tmp(path: &Path, write: impl FnOnce(&Path) -> Result<(), Error>) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    write(&tmp)?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn scores_jsonl(scores: &Scores) -> Vec<u8> {
    let mut out = Vec::new();
    for ((topic_id, doc_id), score) in scores {
        let rec = ScoreRecord {
            topic_id: *topic_id,
            doc_id: doc_id.clone(),
            score: *score,
        };
        serde_json::to_writer(&mut out, &rec).expect("score serializes");
        out.push(b'\n');
    }
    out
}

pub fn read_scores(path: &Path) -> CliResult<AspectScores> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ScoreRecord = serde_json::from_str(line)
            .map_err(|e| Error::RunFormat(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.insert((rec.topic_id, rec.doc_id), rec.score);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexStats {
    pub documents: usize,
    pub skipped: usize,
    pub avgdl: f64,
    pub vocabulary: usize,
}

pub fn index(cfg: &PipelineConfig) -> CliResult<IndexStats> {
    let corpus = cfg.input("corpus", &cfg.corpus)?;
    let ingested = ingest_corpus(corpus)?;
    let parsed: Vec<ParsedDocument> = ingested.documents.par_iter().map(extract_text).collect();
    let index = IndexedCorpus::build(parsed)?;
    write_atomic(&cfg.index_path(), &index.to_bytes())?;
    let stats = IndexStats {
        documents: index.num_docs(),
        skipped: ingested.skipped,
        avgdl: index.avgdl(),
        vocabulary: index.vocabulary_size(),
    };
    events::emit(
        "index_built",
        json!({"documents": stats.documents, "avgdl": stats.avgdl, "vocabulary": stats.vocabulary}),
    );
    Ok(stats)
}

fn load_cache(cfg: &PipelineConfig) -> CliResult<PageRankCache> {
    match &cfg.pagerank_cache {
        Some(p) => {
            require_exists("pagerank cache", p)?;
            Ok(PageRankCache::load(p)?)
        }
        None => {
            events::emit(
                "pagerank_cache_missing",
                json!({"effect": "pagerank features unknown"}),
            );
            Ok(PageRankCache::default())
        }
    }
}

/// Look up domains of the corpus that the cache does not hold yet.
pub fn fetch_pagerank(cfg: &PipelineConfig) -> CliResult<FetchReport> {
    let corpus = cfg.input("corpus", &cfg.corpus)?;
    let cache_path = cfg
        .pagerank_cache
        .clone()
        .ok_or_else(|| CliError::Usage("no pagerank cache path given (flag or config)".into()))?;
    let key = std::env::var("OPR_API_KEY")
        .map_err(|_| CliError::Usage("OPR_API_KEY is not set".into()))?;
    let cache = PageRankCache::load(&cache_path)?;
    let docs = ingest_corpus(corpus)?.documents;
    let domains: Vec<String> = docs
        .iter()
        .filter_map(|d| url_domain(&d.url))
        .filter(|d| cache.get(d).is_none())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let report = fetch_into_cache(&domains, &FetchConfig::new(key), &cache_path)?;
    events::emit(
        "pagerank_fetched",
        json!({"requested": domains.len(), "failed": report.failed.len(), "quota_exceeded": report.quota_exceeded}),
    );
    Ok(report)
}

pub fn features(cfg: &PipelineConfig) -> CliResult<usize> {
    let corpus = cfg.input("corpus", &cfg.corpus)?;
    let cache = load_cache(cfg)?;
    let docs = ingest_corpus(corpus)?.documents;
    let rows: Vec<(String, DocumentFeatures)> = docs
        .par_iter()
        .map(|d| (d.url.clone(), extract_features(d, &cache)))
        .collect();
    with_tmp(&cfg.layout().features(), |tmp| {
        write_features_csv(tmp, &rows)
    })?;
    Ok(rows.len())
}

pub fn train_credibility(cfg: &PipelineConfig) -> CliResult<EnsembleModel> {
    let training = cfg.input("training", &cfg.training)?;
    let pages = match &cfg.corpus {
        Some(c) if c.exists() => Some((ingest_corpus(c)?.documents, load_cache(cfg)?)),
        _ => None,
    };
    let set = TrainingSet::load_csv(training, pages.as_ref().map(|(d, c)| (d.as_slice(), c)))?;
    let model = EnsembleModel::train(&set, cfg.seed)?;
    with_tmp(&cfg.layout().model(), |tmp| model.save(tmp))?;
    events::emit(
        "credibility_trained",
        json!({"examples": set.len(), "cv_accuracy": model.cv_accuracy, "seed": cfg.seed}),
    );
    Ok(model)
}

/// Recipes from every configured file; run ids must be unique across files.
pub fn load_all_recipes(cfg: &PipelineConfig) -> CliResult<Vec<FusionRecipe>> {
    let mut all = Vec::new();
    let mut seen = HashSet::new();
    for path in &cfg.recipes {
        require_exists("recipe file", path)?;
        for r in load_recipes(path)? {
            if !seen.insert(r.run_id.clone()) {
                return Err(Error::Recipe(format!("run id {} defined twice", r.run_id)).into());
            }
            all.push(r);
        }
    }
    Ok(all)
}

/// The initial runs the recipes start from.
pub fn initial_pairs(cfg: &PipelineConfig) -> CliResult<BTreeSet<(RetrievalModel, QueryFields)>> {
    let recipes = load_all_recipes(cfg)?;
    let mut pairs: BTreeSet<_> = recipes
        .iter()
        .filter_map(|r| r.model.map(|m| (m, r.query_fields)))
        .collect();
    if pairs.is_empty() {
        pairs.insert((RetrievalModel::Bm25, QueryFields::Description));
        pairs.insert((RetrievalModel::Rm3, QueryFields::Description));
    }
    Ok(pairs)
}

fn read_initial(
    cfg: &PipelineConfig,
    model: RetrievalModel,
    fields: QueryFields,
) -> CliResult<Run> {
    let path = cfg.layout().initial_run(model, fields);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "initial run not found: {} (run `score relevance` first)",
            path.display()
        )));
    }
    Ok(Run::read(&path)?)
}

/// Every (topic, document) pair retrieved by some initial run.
fn candidates(cfg: &PipelineConfig) -> CliResult<BTreeMap<u32, BTreeSet<String>>> {
    let mut out: BTreeMap<u32, BTreeSet<String>> = BTreeMap::new();
    for (model, fields) in initial_pairs(cfg)? {
        for list in read_initial(cfg, model, fields)?.topics.into_values() {
            out.entry(list.topic_id)
                .or_default()
                .extend(list.entries.into_iter().map(|(d, _)| d));
        }
    }
    Ok(out)
}

pub fn score(cfg: &PipelineConfig, aspect: ScoreAspect) -> CliResult<usize> {
    match aspect {
        ScoreAspect::Relevance => score_relevance(cfg),
        ScoreAspect::Credibility => score_credibility(cfg),
        ScoreAspect::Misinfo => score_misinformation(cfg),
    }
}

fn score_relevance(cfg: &PipelineConfig) -> CliResult<usize> {
    let topics = load_topics(cfg.input("topics", &cfg.topics)?)?;
    let index_path = cfg.index_path();
    require_exists("index", &index_path)?;
    let index = IndexedCorpus::load(&index_path)?;
    let layout = cfg.layout();
    let mut outputs = Vec::new();
    let mut written = 0;
    for (model, fields) in initial_pairs(cfg)? {
        let lists: Vec<ScoredList> = topics
            .par_iter()
            .map(|t| {
                let mut q = QuerySpec::new(t.topic_id, t.query_text(fields), model);
                q.k_docs = cfg.depth;
                search(&index, &q)
            })
            .collect();
        let mut run = Run::new(format!("{}_{}", model.as_str(), fields.as_str()));
        let mut scores = Scores::new();
        for list in lists {
            for (d, s) in &list.entries {
                scores.insert((list.topic_id, d.clone()), *s);
            }
            run.insert(list);
        }
        written += scores.len();
        outputs.push((
            layout.initial_run(model, fields),
            run.to_trec().into_bytes(),
        ));
        outputs.push((
            layout.relevance_scores(model, fields),
            scores_jsonl(&scores),
        ));
    }
    for (path, bytes) in outputs {
        write_atomic(&path, &bytes)?;
    }
    Ok(written)
}

fn score_credibility(cfg: &PipelineConfig) -> CliResult<usize> {
    let model_path = cfg.model_path();
    require_exists("credibility model", &model_path)?;
    let features_path = cfg.layout().features();
    require_exists("features", &features_path)?;
    let model = EnsembleModel::load(&model_path)?;
    let features = read_features_csv(&features_path)?;
    let candidates = candidates(cfg)?;
    let docs: Vec<&String> = candidates
        .values()
        .flatten()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let per_doc: HashMap<&String, f64> = docs
        .par_iter()
        .map(|&d| {
            let x = match features.get(d) {
                None => return Err(Error::Feature(format!("no features for document {d}"))),
                Some(Err(e)) => return Err(Error::Feature(format!("document {d}: {e}"))),
                Some(Ok(x)) => x,
            };
            Ok((d, credibility_score(&model, x)?))
        })
        .collect::<Result<_, Error>>()?;
    let scores: Scores = candidates
        .iter()
        .flat_map(|(t, ds)| ds.iter().map(|d| ((*t, d.clone()), per_doc[d])))
        .collect();
    write_atomic(&cfg.layout().credibility_scores(), &scores_jsonl(&scores))?;
    Ok(scores.len())
}

fn score_misinformation(cfg: &PipelineConfig) -> CliResult<usize> {
    let topics = load_topics(cfg.input("topics", &cfg.topics)?)?;
    let corpus = cfg.input("corpus", &cfg.corpus)?;
    let cues = match &cfg.cues {
        Some(dir) => {
            require_exists("cue directory", dir)?;
            CueLists::load(dir)?
        }
        None => CueLists::default(),
    };
    let stance = match &cfg.stance {
        Some(p) => {
            require_exists("stance file", p)?;
            load_external_stance(p)?
        }
        None => ExternalStance::default(),
    };
    if stance.is_empty() {
        events::emit(
            "stance_unavailable",
            json!({"level": "warning", "effect": "lexical stance for every document"}),
        );
    }
    let candidates = candidates(cfg)?;
    let docs = ingest_corpus(corpus)?.documents;
    let by_id: HashMap<&str, &RawDocument> = docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();

    let mut scores = Scores::new();
    for topic in &topics {
        let Some(ids) = candidates.get(&topic.topic_id) else {
            continue;
        };
        let ids: Vec<&String> = ids.iter().collect();
        let scored: Vec<(String, f64, bool)> = ids
            .par_iter()
            .map(|&d| misinfo_for(topic, d, &stance, &by_id, &cues))
            .collect::<Result<_, Error>>()?;
        let fallback = scored.iter().filter(|s| s.2).count();
        events::emit(
            "stance_fallback",
            json!({"topic_id": topic.topic_id, "documents": scored.len(), "fallback": fallback}),
        );
        for (d, s, _) in scored {
            scores.insert((topic.topic_id, d), s);
        }
    }
    write_atomic(
        &cfg.layout().misinformation_scores(),
        &scores_jsonl(&scores),
    )?;
    Ok(scores.len())
}

/// Misinformation score of one document and whether it used the lexical
/// fallback.
fn misinfo_for(
    topic: &Topic,
    doc_id: &str,
    stance: &ExternalStance,
    by_id: &HashMap<&str, &RawDocument>,
    cues: &CueLists,
) -> Result<(String, f64, bool), Error> {
    if let Some(p) = stance.get(topic.topic_id, doc_id) {
        return Ok((
            doc_id.to_owned(),
            MisinfoScore::new(topic, doc_id, p).s,
            false,
        ));
    }
    let raw = by_id.get(doc_id).ok_or_else(|| {
        Error::CorpusFormat(format!(
            "document {doc_id} is in an initial run but not in the corpus"
        ))
    })?;
    let trimmed = trim_to_claim(&extract_text(raw), topic);
    let p = lexical_stance(&trimmed, topic, cues);
    Ok((
        doc_id.to_owned(),
        MisinfoScore::new(topic, doc_id, &p).s,
        true,
    ))
}

fn aspect_scores(
    recipes: &[FusionRecipe],
    aspect: Aspect,
    path: &Path,
    inputs: &mut BTreeMap<String, String>,
) -> CliResult<Option<AspectScores>> {
    let needing: Vec<&str> = recipes
        .iter()
        .filter(|r| r.required_aspects().contains(&aspect))
        .map(|r| r.run_id.as_str())
        .collect();
    if needing.is_empty() {
        return Ok(None);
    }
    if !path.exists() {
        return Err(Error::Recipe(format!(
            "{} scores not found at {}; needed by {}",
            aspect.as_str(),
            path.display(),
            needing.join(", ")
        ))
        .into());
    }
    inputs.insert(format!("scores/{}", file_name(path)), file_digest(path)?);
    Ok(Some(read_scores(path)?))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Execute every recipe and write one run file per recipe plus the manifest.
pub fn fuse(cfg: &PipelineConfig) -> CliResult<RunManifest> {
    let recipes = load_all_recipes(cfg)?;
    if recipes.is_empty() {
        return Err(CliError::Usage(
            "no recipe files given (flag or config)".into(),
        ));
    }
    for r in &recipes {
        if let Some(c) = r.cutoff.filter(|&c| c > cfg.depth) {
            return Err(Error::Recipe(format!(
                "{}: cutoff {c} exceeds the retrieval depth {}",
                r.run_id, cfg.depth
            ))
            .into());
        }
    }
    let layout = cfg.layout();
    let mut inputs = BTreeMap::new();
    for (name, path) in [
        ("corpus", &cfg.corpus),
        ("topics", &cfg.topics),
        ("stance", &cfg.stance),
    ] {
        if let Some(p) = path.as_deref().filter(|p| p.is_file()) {
            inputs.insert(name.to_owned(), file_digest(p)?);
        }
    }
    for path in &cfg.recipes {
        inputs.insert(format!("recipes/{}", file_name(path)), file_digest(path)?);
    }
    let credibility = aspect_scores(
        &recipes,
        Aspect::Credibility,
        &layout.credibility_scores(),
        &mut inputs,
    )?;
    let misinformation = aspect_scores(
        &recipes,
        Aspect::Misinformation,
        &layout.misinformation_scores(),
        &mut inputs,
    )?;
    let mut initial = BTreeMap::new();
    for r in &recipes {
        if let Some(m) = r.model {
            if let std::collections::btree_map::Entry::Vacant(slot) =
                initial.entry((m, r.query_fields))
            {
                let path = layout.initial_run(m, r.query_fields);
                let run = read_initial(cfg, m, r.query_fields)?;
                inputs.insert(format!("initial/{}", file_name(&path)), file_digest(&path)?);
                slot.insert(run);
            }
        }
    }

    let mut produced: BTreeMap<String, Run> = BTreeMap::new();
    for r in &recipes {
        let mut out = Run::new(r.run_id.clone());
        if r.strategy == Strategy::Rrf {
            let sources: Vec<&Run> = r
                .fuse_runs
                .iter()
                .map(|id| {
                    produced
                        .get(id)
                        .ok_or_else(|| Error::Recipe(format!("{}: unknown run {id}", r.run_id)))
                })
                .collect::<Result<_, Error>>()?;
            let topics: BTreeSet<u32> = sources
                .iter()
                .flat_map(|s| s.topics.keys().copied())
                .collect();
            for t in topics {
                let lists: Vec<&ScoredList> =
                    sources.iter().filter_map(|s| s.topics.get(&t)).collect();
                out.insert(fuse_recipe_runs(r, &lists)?);
            }
        } else {
            let init = &initial[&(r.model.expect("validated"), r.query_fields)];
            let required = r.required_aspects();
            let cred = credibility
                .as_ref()
                .filter(|_| required.contains(&Aspect::Credibility));
            let mis = misinformation
                .as_ref()
                .filter(|_| required.contains(&Aspect::Misinformation));
            let lists: Vec<&ScoredList> = init.topics.values().collect();
            let fused: Vec<ScoredList> = lists
                .par_iter()
                .map(|l| apply_recipe(r, l, &TopicMatrix::build(l, cred, mis)?))
                .collect::<Result<_, Error>>()?;
            for l in fused {
                out.insert(l);
            }
        }
        produced.insert(r.run_id.clone(), out);
    }

    let mut runs = Vec::new();
    let mut files = Vec::new();
    for r in &recipes {
        let bytes = produced[&r.run_id].to_trec().into_bytes();
        let path = layout.run(&r.run_id);
        runs.push(RunEntry {
            run_id: r.run_id.clone(),
            task: match r.task {
                Task::TotalRecall => "total_recall".into(),
                Task::Adhoc => "adhoc".into(),
            },
            strategy: r.strategy.as_str().into(),
            recipe_sha256: r.digest(),
            file: format!("runs/{}", file_name(&path)),
            file_sha256: aspectrank::codec::sha256_hex(&bytes),
        });
        files.push((path, bytes));
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        depth: cfg.depth,
        created_unix: timestamp(),
        inputs,
        runs,
    };
    for (path, bytes) in files {
        write_atomic(&path, &bytes)?;
    }
    write_atomic(&layout.manifest(), manifest.to_json().as_bytes())?;
    Ok(manifest)
}

/// Qrels from a combined judgment file, or from a directory holding one
/// `<mapping>.qrels` file per label mapping.
pub fn load_qrels(path: &Path) -> CliResult<QrelsSet> {
    if !path.is_dir() {
        return Ok(eval::expand_all(&AspectQrels::load(path)?));
    }
    let mut set = QrelsSet::new();
    for m in MAPPINGS.iter() {
        let p = path.join(format!("{}.qrels", m.name));
        if p.exists() {
            set.insert(m.name.to_owned(), MappedQrels::load(m, &p)?);
        }
    }
    if set.is_empty() {
        return Err(
            Error::Qrels(format!("{} holds no <mapping>.qrels files", path.display())).into(),
        );
    }
    Ok(set)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalOutput {
    pub adhoc: BTreeMap<String, Vec<MeasureResult>>,
    pub total_recall: BTreeMap<String, MeasureResult>,
}

/// Evaluate the run file of every recipe: ad-hoc runs under all label
/// mappings, total-recall runs by Rprec.
pub fn evaluate(cfg: &PipelineConfig) -> CliResult<EvalOutput> {
    let qrels_path = cfg.input("qrels", &cfg.qrels)?;
    let recipes = load_all_recipes(cfg)?;
    if recipes.is_empty() {
        return Err(CliError::Usage(
            "no recipe files given (flag or config)".into(),
        ));
    }
    let layout = cfg.layout();
    let mut runs = Vec::new();
    for r in &recipes {
        let path = layout.run(&r.run_id);
        require_exists("run file", &path)?;
        runs.push((r, Run::read(&path)?));
    }
    let qrels = load_qrels(qrels_path)?;
    let params = cfg.eval_params();
    let mut out = EvalOutput::default();
    for (r, run) in runs {
        match r.task {
            Task::Adhoc => {
                let res = eval::evaluate_run(&run, &qrels, qrels::adhoc_mappings(), &params)?;
                out.adhoc.insert(r.run_id.clone(), res);
            }
            Task::TotalRecall => {
                let mut res =
                    eval::evaluate_run(&run, &qrels, [qrels::total_recall_mapping()], &params)?;
                out.total_recall.insert(r.run_id.clone(), res.remove(0));
            }
        }
    }
    let dir = layout.eval_dir();
    let mut files = vec![("mappings.tsv", eval::mapping_table())];
    if !out.adhoc.is_empty() {
        files.push(("adhoc.tsv", eval::adhoc_table(&out.adhoc)));
        files.push(("harmful_helpful.csv", eval::harmful_helpful_csv(&out.adhoc)));
    }
    if !out.total_recall.is_empty() {
        files.push((
            "total_recall_rprec.tsv",
            eval::rprec_table(&out.total_recall),
        ));
    }
    let mut results = serde_json::to_string_pretty(&out).expect("results serialize");
    results.push('\n');
    files.push(("results.json", results));
    for (name, text) in files {
        write_atomic(&dir.join(name), text.as_bytes())?;
    }
    Ok(out)
}

/// Check every configured path before the pipeline writes anything.
pub fn validate_pipeline(cfg: &PipelineConfig) -> CliResult<()> {
    cfg.input("corpus", &cfg.corpus)?;
    cfg.input("topics", &cfg.topics)?;
    if cfg.recipes.is_empty() {
        return Err(CliError::Usage(
            "no recipe files given (flag or config)".into(),
        ));
    }
    for p in &cfg.recipes {
        require_exists("recipe file", p)?;
    }
    match &cfg.credibility_model {
        Some(m) => require_exists("credibility model", m)?,
        None => {
            cfg.input("training", &cfg.training)?;
        }
    }
    for (name, p) in [
        ("stance file", &cfg.stance),
        ("pagerank cache", &cfg.pagerank_cache),
        ("cue directory", &cfg.cues),
        ("qrels", &cfg.qrels),
    ] {
        if let Some(p) = p {
            require_exists(name, p)?;
        }
    }
    load_all_recipes(cfg)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSummary {
    pub index: IndexStats,
    pub cv_accuracy: Option<f64>,
    pub manifest: RunManifest,
    pub evaluation: Option<EvalOutput>,
}

/// index, features, train (unless a model is configured), score all
/// aspects, fuse, and evaluate when qrels are configured.
pub fn pipeline(cfg: &PipelineConfig) -> CliResult<PipelineSummary> {
    validate_pipeline(cfg)?;
    let index = index(cfg)?;
    features(cfg)?;
    let cv_accuracy = match cfg.credibility_model {
        Some(_) => None,
        None => Some(train_credibility(cfg)?.cv_accuracy),
    };
    for aspect in [
        ScoreAspect::Relevance,
        ScoreAspect::Credibility,
        ScoreAspect::Misinfo,
    ] {
        score(cfg, aspect)?;
    }
    let manifest = fuse(cfg)?;
    let evaluation = match cfg.qrels {
        Some(_) => Some(evaluate(cfg)?),
        None => None,
    };
    Ok(PipelineSummary {
        index,
        cv_accuracy,
        manifest,
        evaluation,
    })
}
