//! `taxenrich` command-line tool.

mod commands;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use taxenrich::Pos;

use crate::commands::Failure;
use crate::settings::{Method, Settings};

#[derive(Parser, Debug)]
#[command(name = "taxenrich", version, about = "Place new words into an existing wordnet taxonomy")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Experiment file with `key = value` lines; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Random seed for negative sampling.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Neighbours retrieved and predictions kept per word (default 10).
    #[arg(long, global = true, value_name = "N")]
    k: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract orphan words and their gold hypernyms from two taxonomy versions.
    BuildDataset(BuildDatasetArgs),
    /// Train the logistic-regression reranker on the old taxonomy.
    Train(TrainArgs),
    /// Predict hypernym synsets for every word of a dataset.
    Predict(PredictArgs),
    /// Score predictions against a dataset.
    Eval(EvalArgs),
    /// Print taxonomy and dataset statistics.
    Report(ReportArgs),
    /// Measure how many orphans Wiktionary covers.
    WikiCoverage(WikiCoverageArgs),
}

#[derive(Args, Debug)]
struct BuildDatasetArgs {
    /// Older taxonomy (JSONL).
    #[arg(long, value_name = "PATH")]
    old_taxonomy: Option<PathBuf>,
    /// Newer taxonomy (JSONL).
    #[arg(long, value_name = "PATH")]
    new_taxonomy: Option<PathBuf>,
    /// Output dataset (TSV).
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// Output statistics (JSON); defaults to `<dataset>.stats.json`.
    #[arg(long, value_name = "PATH")]
    stats: Option<PathBuf>,
    /// Part of speech: n or v.
    #[arg(long)]
    pos: Option<Pos>,
    /// Drop short words and named entities.
    #[arg(long)]
    restricted: bool,
    /// Minimum number of letters.
    #[arg(long, value_name = "N")]
    min_length: Option<usize>,
    /// Drop words with a capitalized token.
    #[arg(long)]
    exclude_named_entities: bool,
    /// Drop multiword expressions.
    #[arg(long)]
    exclude_multiword: bool,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Taxonomy to draw training words from (JSONL).
    #[arg(long, alias = "taxonomy", value_name = "PATH")]
    old_taxonomy: Option<PathBuf>,
    /// Word vectors (word2vec text format).
    #[arg(long, value_name = "PATH")]
    embeddings: Option<PathBuf>,
    /// Read at most this many vectors.
    #[arg(long, value_name = "N")]
    embeddings_limit: Option<usize>,
    /// Wiktionary entries (JSONL); without it the Wiktionary features are zero.
    #[arg(long, value_name = "PATH")]
    wiktionary: Option<PathBuf>,
    /// Output model file.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Also write the training pairs (TSV).
    #[arg(long, value_name = "PATH")]
    pairs: Option<PathBuf>,
    /// Part of speech: n or v.
    #[arg(long)]
    pos: Option<Pos>,
    /// L2 penalty on the weights.
    #[arg(long, value_name = "X")]
    l2_lambda: Option<f64>,
    /// Gradient-descent iteration cap.
    #[arg(long, value_name = "N")]
    max_iters: Option<usize>,
    /// Gradient tolerance for convergence.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    /// Negatives drawn per positive pair.
    #[arg(long, value_name = "N")]
    negatives_per_positive: Option<usize>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Taxonomy to attach words to (JSONL).
    #[arg(long, alias = "taxonomy", value_name = "PATH")]
    old_taxonomy: Option<PathBuf>,
    /// Word vectors (word2vec text format).
    #[arg(long, value_name = "PATH")]
    embeddings: Option<PathBuf>,
    /// Read at most this many vectors.
    #[arg(long, value_name = "N")]
    embeddings_limit: Option<usize>,
    /// Words to predict for (dataset TSV).
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// Wiktionary entries (JSONL), for ranking-wiki.
    #[arg(long, value_name = "PATH")]
    wiktionary: Option<PathBuf>,
    /// Trained model, for ranking-wiki.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Output predictions (TSV).
    #[arg(long, value_name = "PATH")]
    predictions: Option<PathBuf>,
    /// Candidate generation and ranking method.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Also write `<predictions>.explain.tsv` with each candidate's provenance.
    #[arg(long)]
    explain: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Taxonomy the gold synsets belong to (JSONL).
    #[arg(long, alias = "taxonomy", value_name = "PATH")]
    old_taxonomy: Option<PathBuf>,
    /// Gold dataset (TSV).
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// Predictions to score (TSV).
    #[arg(long, value_name = "PATH")]
    predictions: Option<PathBuf>,
    /// Output report (JSON); defaults to `<predictions>.eval.json`.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Relevance judgements (TSV `word synset 0|1`) for Precision@k.
    #[arg(long, value_name = "PATH")]
    relevance: Option<PathBuf>,
    /// Print MAP per word group (named entity, short, other).
    #[arg(long)]
    groups: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Older taxonomy (JSONL).
    #[arg(long, value_name = "PATH")]
    old_taxonomy: Option<PathBuf>,
    /// Newer taxonomy (JSONL).
    #[arg(long, value_name = "PATH")]
    new_taxonomy: Option<PathBuf>,
    /// Dataset (TSV) for the sense-count histogram.
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// Output report (JSON).
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WikiCoverageArgs {
    /// Taxonomy the gold synsets belong to (JSONL).
    #[arg(long, alias = "taxonomy", value_name = "PATH")]
    old_taxonomy: Option<PathBuf>,
    /// Dataset (TSV).
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// Wiktionary entries (JSONL).
    #[arg(long, value_name = "PATH")]
    wiktionary: Option<PathBuf>,
    /// Output report (JSON).
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

impl Command {
    fn settings(&self) -> Settings {
        match self {
            Command::BuildDataset(a) => Settings {
                old_taxonomy: a.old_taxonomy.clone(),
                new_taxonomy: a.new_taxonomy.clone(),
                dataset: a.dataset.clone(),
                stats: a.stats.clone(),
                pos: a.pos,
                restricted: flag(a.restricted),
                min_length: a.min_length,
                exclude_named_entities: flag(a.exclude_named_entities),
                exclude_multiword: flag(a.exclude_multiword),
                ..Default::default()
            },
            Command::Train(a) => Settings {
                old_taxonomy: a.old_taxonomy.clone(),
                embeddings: a.embeddings.clone(),
                embeddings_limit: a.embeddings_limit,
                wiktionary: a.wiktionary.clone(),
                model: a.model.clone(),
                pairs: a.pairs.clone(),
                pos: a.pos,
                l2_lambda: a.l2_lambda,
                max_iters: a.max_iters,
                tol: a.tol,
                negatives_per_positive: a.negatives_per_positive,
                ..Default::default()
            },
            Command::Predict(a) => Settings {
                old_taxonomy: a.old_taxonomy.clone(),
                embeddings: a.embeddings.clone(),
                embeddings_limit: a.embeddings_limit,
                dataset: a.dataset.clone(),
                wiktionary: a.wiktionary.clone(),
                model: a.model.clone(),
                predictions: a.predictions.clone(),
                method: a.method,
                ..Default::default()
            },
            Command::Eval(a) => Settings {
                old_taxonomy: a.old_taxonomy.clone(),
                dataset: a.dataset.clone(),
                predictions: a.predictions.clone(),
                output: a.output.clone(),
                relevance: a.relevance.clone(),
                ..Default::default()
            },
            Command::Report(a) => Settings {
                old_taxonomy: a.old_taxonomy.clone(),
                new_taxonomy: a.new_taxonomy.clone(),
                dataset: a.dataset.clone(),
                output: a.output.clone(),
                ..Default::default()
            },
            Command::WikiCoverage(a) => Settings {
                old_taxonomy: a.old_taxonomy.clone(),
                dataset: a.dataset.clone(),
                wiktionary: a.wiktionary.clone(),
                output: a.output.clone(),
                ..Default::default()
            },
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let flags =
        Settings { seed: cli.global.seed, threads: cli.global.threads, k: cli.global.k, ..cli.command.settings() };
    let file = match &cli.global.config {
        Some(path) => Settings::from_file(path).map_err(Failure::Input)?,
        None => Settings::default(),
    };
    let settings = flags.over(file);
    if let Some(threads) = settings.threads {
        if threads == 0 {
            return Err(Failure::Input(anyhow::anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| Failure::Runtime(e.into()))?;
    }
    match cli.command {
        Command::BuildDataset(_) => commands::build_dataset(&settings),
        Command::Train(_) => commands::train(&settings),
        Command::Predict(a) => commands::predict(&settings, a.explain),
        Command::Eval(a) => commands::eval(&settings, a.groups),
        Command::Report(_) => commands::report(&settings),
        Command::WikiCoverage(_) => commands::wiki_coverage(&settings),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, err) = match failure {
                Failure::Input(e) => (2, e),
                Failure::Runtime(e) => (1, e),
            };
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
