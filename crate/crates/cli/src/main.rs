use std::path::PathBuf;
use std::process::ExitCode;

use aspectrank_cli::stages::{self, ScoreAspect};
use aspectrank_cli::{CliError, CliResult, PipelineConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aspectrank",
    version,
    about = "Multi-aspect retrieval, re-ranking and evaluation"
)]
struct Cli {
    /// TOML pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    paths: PathArgs,
    #[command(subcommand)]
    command: Command,
}

/// Overrides for values of the configuration file.
#[derive(Args)]
struct PathArgs {
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    topics: Option<PathBuf>,
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    #[arg(long, global = true)]
    stance: Option<PathBuf>,
    #[arg(long, global = true)]
    pagerank_cache: Option<PathBuf>,
    #[arg(long, global = true)]
    training: Option<PathBuf>,
    #[arg(long, global = true)]
    credibility_model: Option<PathBuf>,
    #[arg(long, global = true)]
    cues: Option<PathBuf>,
    /// Recipe file; repeat for several.
    #[arg(long = "recipes", global = true)]
    recipes: Vec<PathBuf>,
    #[arg(long, global = true)]
    qrels: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Retrieval depth of the initial runs.
    #[arg(long, global = true)]
    depth: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the inverted index from the corpus.
    Index,
    /// Fill the PageRank cache for the corpus domains (needs OPR_API_KEY).
    FetchPagerank,
    /// Extract credibility features for every document.
    Features,
    /// Train the credibility ensemble.
    TrainCred,
    /// Write per-aspect score files.
    Score {
        #[arg(value_enum)]
        aspect: ScoreAspect,
    },
    /// Execute the recipes and write run files plus a manifest.
    Fuse,
    /// Evaluate the recipe runs against qrels.
    Eval,
    /// Run every stage in order.
    Pipeline,
}

fn configure(cli: &Cli) -> CliResult<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let p = &cli.paths;
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    set(&mut cfg.corpus, &p.corpus);
    set(&mut cfg.topics, &p.topics);
    set(&mut cfg.index, &p.index);
    set(&mut cfg.stance, &p.stance);
    set(&mut cfg.pagerank_cache, &p.pagerank_cache);
    set(&mut cfg.training, &p.training);
    set(&mut cfg.credibility_model, &p.credibility_model);
    set(&mut cfg.cues, &p.cues);
    set(&mut cfg.qrels, &p.qrels);
    if !p.recipes.is_empty() {
        cfg.recipes.clone_from(&p.recipes);
    }
    if let Some(o) = &p.output_dir {
        cfg.output_dir.clone_from(o);
    }
    if let Some(d) = p.depth {
        cfg.depth = d;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cfg.depth == 0 {
        return Err(CliError::Usage("depth must be positive".into()));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let cfg = configure(&cli)?;
    match cli.command {
        Command::Index => {
            let s = stages::index(&cfg)?;
            println!(
                "indexed N={} avgdl={:.4} vocabulary={} skipped={}",
                s.documents, s.avgdl, s.vocabulary, s.skipped
            );
        }
        Command::FetchPagerank => {
            let r = stages::fetch_pagerank(&cfg)?;
            println!(
                "fetched {} domains, {} failed",
                r.records.len(),
                r.failed.len()
            );
        }
        Command::Features => {
            let n = stages::features(&cfg)?;
            println!(
                "features for {n} documents -> {}",
                cfg.layout().features().display()
            );
        }
        Command::TrainCred => {
            let m = stages::train_credibility(&cfg)?;
            println!(
                "cv accuracy {:.4} -> {}",
                m.cv_accuracy,
                cfg.layout().model().display()
            );
        }
        Command::Score { aspect } => {
            let n = stages::score(&cfg, aspect)?;
            println!("{n} scores written");
        }
        Command::Fuse => {
            let m = stages::fuse(&cfg)?;
            println!(
                "{} runs -> {}",
                m.runs.len(),
                cfg.layout().runs_dir().display()
            );
        }
        Command::Eval => {
            let out = stages::evaluate(&cfg)?;
            println!(
                "evaluated {} ad-hoc and {} total-recall runs -> {}",
                out.adhoc.len(),
                out.total_recall.len(),
                cfg.layout().eval_dir().display()
            );
        }
        Command::Pipeline => {
            let s = stages::pipeline(&cfg)?;
            println!(
                "indexed N={} avgdl={:.4} vocabulary={}",
                s.index.documents, s.index.avgdl, s.index.vocabulary
            );
            if let Some(acc) = s.cv_accuracy {
                println!("credibility cv accuracy {acc:.4}");
            }
            println!(
                "{} runs -> {}",
                s.manifest.runs.len(),
                cfg.layout().runs_dir().display()
            );
            if s.evaluation.is_some() {
                println!("evaluation -> {}", cfg.layout().eval_dir().display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
