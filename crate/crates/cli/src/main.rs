//! `weld`: train embeddings, align, compute WELD distances and cluster.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use weld::alignment::{align_to_pivot, AlignmentTable};
use weld::clustering::{render_dendrogram, to_newick, upgma, Annotations, RenderFormat};
use weld::corpus::{
    genome_ngram_sentences, load_coding_regions, load_verse_aligned, parse_verse_tsv, CorpusFormat, GenomeFormat,
    InvalidBasePolicy, PunctuationMode, Sentence, MAX_NGRAM, MIN_NGRAM,
};
use weld::divergence::{distance_matrix, unresolvable_pivots, PivotScope};
use weld::embedding::{train, EmbeddingConfig};
use weld::pipeline::{run_genome, run_natural, RunConfig, Workflow};
use weld::{DistanceMatrixF64, EmbeddingModelF32, Error};

#[derive(Parser)]
#[command(name = "weld", version, about = "Compare languages through word-embedding similarity distributions")]
struct Cli {
    /// Declarative run config (TOML). Subcommands read their settings from it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the embedding seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize a verse-aligned corpus, or summarize a coding-region file.
    Ingest(IngestArgs),
    /// Train one embedding model.
    Train(TrainArgs),
    /// Align languages to a pivot language.
    Align(AlignArgs),
    /// Pairwise WELD distances between trained models.
    Diverge(DivergeArgs),
    /// UPGMA clustering of a distance matrix.
    Cluster(ClusterArgs),
    /// Run the whole pipeline described by --config.
    Run,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusFormatArg {
    Tsv,
    BibleXml,
}

impl From<CorpusFormatArg> for CorpusFormat {
    fn from(f: CorpusFormatArg) -> Self {
        match f {
            CorpusFormatArg::Tsv => CorpusFormat::Tsv,
            CorpusFormatArg::BibleXml => CorpusFormat::BibleXml,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenomeFormatArg {
    Fasta,
    Tsv,
}

impl From<GenomeFormatArg> for GenomeFormat {
    fn from(f: GenomeFormatArg) -> Self {
        match f {
            GenomeFormatArg::Fasta => GenomeFormat::Fasta,
            GenomeFormatArg::Tsv => GenomeFormat::Tsv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Reject,
    Clean,
}

impl From<PolicyArg> for InvalidBasePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Reject => InvalidBasePolicy::Reject,
            PolicyArg::Clean => InvalidBasePolicy::Clean,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PunctuationArg {
    Delete,
    Split,
}

impl From<PunctuationArg> for PunctuationMode {
    fn from(p: PunctuationArg) -> Self {
        match p {
            PunctuationArg::Delete => PunctuationMode::Delete,
            PunctuationArg::Split => PunctuationMode::Split,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Global,
    PerPair,
}

#[derive(Args)]
struct IngestArgs {
    /// Corpus directory with one file per language.
    #[arg(long, conflicts_with = "genome", required_unless_present = "genome")]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tsv")]
    format: CorpusFormatArg,
    #[arg(long, value_enum, default_value = "delete")]
    punctuation: PunctuationArg,
    /// Coding-region file (FASTA or organism<TAB>sequence).
    #[arg(long)]
    genome: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fasta")]
    genome_format: GenomeFormatArg,
    #[arg(long, value_enum, default_value = "reject")]
    policy: PolicyArg,
}

#[derive(Args)]
struct TrainArgs {
    /// Tokenized verse TSV (`verse_id<TAB>tokens`).
    #[arg(long, conflicts_with = "genome", required_unless_present = "genome")]
    input: Option<PathBuf>,
    /// Coding-region file; trains on its n-grams.
    #[arg(long)]
    genome: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fasta")]
    genome_format: GenomeFormatArg,
    #[arg(long, value_enum, default_value = "reject")]
    policy: PolicyArg,
    /// n-gram length for --genome.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Output model path; defaults to `<out>/<input stem>.bin`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Also write averaged vectors in word2vec text format.
    #[arg(long)]
    text: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
}

#[derive(Args)]
struct AlignArgs {
    /// Directory of tokenized `<lang>.tsv` files (see `ingest`).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    pivot: String,
    /// Comma-separated languages; defaults to all in the corpus.
    #[arg(long, value_delimiter = ',')]
    languages: Vec<String>,
    /// Output table; defaults to `<out>/alignment.tsv`.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
}

#[derive(Args)]
struct DivergeArgs {
    #[arg(long)]
    table: PathBuf,
    /// `language=path` per model.
    #[arg(long = "model", required = true, value_parser = parse_model_arg)]
    models: Vec<(String, PathBuf)>,
    /// Output matrix JSON; defaults to `<out>/matrix.json`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the matrix as TSV.
    #[arg(long)]
    tsv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "global")]
    scope: ScopeArg,
    /// Drop pivot words missing from a model instead of failing.
    #[arg(long)]
    drop_unresolvable: bool,
}

#[derive(Args)]
struct ClusterArgs {
    /// Distance matrix (JSON or TSV, by extension).
    #[arg(long)]
    input: PathBuf,
    /// Newick output; defaults to `<out>/tree.nwk`.
    #[arg(long)]
    newick: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    dot: Option<PathBuf>,
    /// `label<TAB>family<TAB>subfamily` sidecar for coloring.
    #[arg(long)]
    annotations: Option<PathBuf>,
}

fn parse_model_arg(s: &str) -> Result<(String, PathBuf), String> {
    let (lang, path) = s.split_once('=').ok_or("expected language=path")?;
    if lang.is_empty() || path.is_empty() {
        return Err("expected language=path".into());
    }
    Ok((lang.to_string(), PathBuf::from(path)))
}

/// Failure of one subcommand: the stage it ran and the cause.
struct Failure {
    stage: &'static str,
    error: anyhow::Error,
}

trait InStage<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InStage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            stage,
            error: e.into(),
        })
    }
}

/// Config problems caught before any stage ran. Errors raised inside a
/// pipeline stage arrive wrapped in `Error::Stage` and are not usage errors.
fn is_usage_error(failure: &Failure) -> bool {
    failure.stage == "config" || matches!(failure.error.downcast_ref::<Error>(), Some(Error::Config(_)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("weld: [{}] {:#}", failure.stage, failure.error);
            if is_usage_error(&failure) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let config = cli
        .config
        .as_deref()
        .map(RunConfig::load)
        .transpose()
        .context("reading --config")
        .stage("config")?;
    let out = cli
        .out
        .clone()
        .or_else(|| config.as_ref().map(|c| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    match &cli.command {
        Command::Ingest(args) => ingest(args, &out).stage("ingest"),
        Command::Train(args) => train_cmd(cli, config.as_ref(), args, &out).stage("train"),
        Command::Align(args) => align(config.as_ref(), args, &out).stage("align"),
        Command::Diverge(args) => diverge(args, &out).stage("diverge"),
        Command::Cluster(args) => cluster(config.as_ref(), args, &out).stage("cluster"),
        Command::Run => run(cli, config).stage("run"),
    }
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn ingest(args: &IngestArgs, out: &Path) -> anyhow::Result<()> {
    if let Some(dir) = &args.corpus {
        let (corpus, dropped) = load_verse_aligned(dir, args.format.into(), args.punctuation.into())?;
        let paths = corpus.write_tsv_dir(out)?;
        let summary: serde_json::Map<String, serde_json::Value> = corpus
            .languages()
            .iter()
            .map(|l| {
                let tokens: usize = corpus.sentences(l).map(|s| s.iter().map(Vec::len).sum()).unwrap_or(0);
                (
                    l.clone(),
                    json!({"verses": corpus.len(), "tokens": tokens, "dropped_verses": dropped.get(l).copied().unwrap_or(0)}),
                )
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&summary)?);
        log::info!("wrote {} tokenized files to {}", paths.len(), out.display());
    } else if let Some(path) = &args.genome {
        let set = load_coding_regions(path, args.genome_format.into(), args.policy.into())?;
        let grams: serde_json::Map<String, serde_json::Value> = (MIN_NGRAM..=MAX_NGRAM)
            .map(|n| (n.to_string(), json!(set.ngram_token_count(n))))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "organism": set.organism,
                "coding_regions": set.len(),
                "dropped": set.dropped,
                "ngram_tokens": grams,
            }))?
        );
    }
    Ok(())
}

fn train_cmd(cli: &Cli, config: Option<&RunConfig>, args: &TrainArgs, out: &Path) -> anyhow::Result<()> {
    let (mut emb, sentences, stem): (EmbeddingConfig, Vec<Sentence>, String) = if let Some(input) = &args.input {
        let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
        let verses = parse_verse_tsv(&text, PunctuationMode::Delete)?;
        let emb = config
            .and_then(|c| c.natural.as_ref())
            .map(|n| n.embedding.clone())
            .unwrap_or_else(EmbeddingConfig::natural);
        (emb, verses.into_iter().map(|(_, s)| s).collect(), file_stem(input))
    } else {
        let path = args.genome.as_ref().expect("clap enforces --input or --genome");
        let set = load_coding_regions(path, args.genome_format.into(), args.policy.into())?;
        let mut sentences = Vec::new();
        for seq in &set.sequences {
            sentences.extend(genome_ngram_sentences(seq, args.n)?);
        }
        let emb = config
            .and_then(|c| c.genome.as_ref())
            .map(|g| g.embedding.clone())
            .unwrap_or_else(EmbeddingConfig::genome);
        (emb, sentences, format!("{}_n{}", set.organism, args.n))
    };
    if let Some(seed) = cli.seed.or(config.and_then(|c| c.seed)) {
        emb.seed = seed;
    }
    if let Some(t) = cli.threads {
        emb.threads = t;
    }
    emb.dim = args.dim.unwrap_or(emb.dim);
    emb.window = args.window.unwrap_or(emb.window);
    emb.epochs = args.epochs.unwrap_or(emb.epochs);
    emb.min_count = args.min_count.unwrap_or(emb.min_count);
    let model: EmbeddingModelF32 = train(&sentences, &emb)?;
    let path = args.model.clone().unwrap_or_else(|| out.join(format!("{stem}.bin")));
    ensure_parent(&path)?;
    model.save(&path)?;
    if let Some(text) = &args.text {
        ensure_parent(text)?;
        model.export_text(text)?;
    }
    println!("{}", path.display());
    Ok(())
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into())
}

fn align(config: Option<&RunConfig>, args: &AlignArgs, out: &Path) -> anyhow::Result<()> {
    let mut ac = config
        .and_then(|c| c.natural.as_ref())
        .map(|n| n.alignment.clone())
        .unwrap_or_default();
    ac.threshold = args.threshold.unwrap_or(ac.threshold);
    ac.iterations = args.iterations.unwrap_or(ac.iterations);
    ac.min_count = args.min_count.unwrap_or(ac.min_count);
    let (corpus, _) = load_verse_aligned(&args.corpus, CorpusFormat::Tsv, PunctuationMode::Delete)?;
    let languages = if args.languages.is_empty() {
        corpus.languages().to_vec()
    } else {
        args.languages.clone()
    };
    let table = align_to_pivot(&corpus, &args.pivot, &languages, &ac)?;
    let path = args.table.clone().unwrap_or_else(|| out.join("alignment.tsv"));
    ensure_parent(&path)?;
    table.save(&path)?;
    eprintln!("{} pivot words aligned in all of {} languages", table.len(), languages.len());
    println!("{}", path.display());
    Ok(())
}

fn diverge(args: &DivergeArgs, out: &Path) -> anyhow::Result<()> {
    let table = AlignmentTable::load(&args.table)?;
    let loaded: Vec<(String, EmbeddingModelF32)> = args
        .models
        .iter()
        .map(|(lang, path)| Ok((lang.clone(), EmbeddingModelF32::load(path)?)))
        .collect::<anyhow::Result<_>>()?;
    let models: Vec<(&str, &EmbeddingModelF32)> = loaded.iter().map(|(l, m)| (l.as_str(), m)).collect();
    if !args.drop_unresolvable {
        let missing = unresolvable_pivots(&table, &models)?;
        if !missing.is_empty() {
            let words: Vec<String> = missing
                .iter()
                .take(20)
                .map(|(i, w)| format!("{} -> {w}", table.pivot_words()[*i]))
                .collect();
            bail!(
                "{} pivot words cannot be resolved in the models (pass --drop-unresolvable to skip them): {}{}",
                missing.len(),
                words.join("; "),
                if missing.len() > 20 { "; ..." } else { "" }
            );
        }
    }
    let scope = match args.scope {
        ScopeArg::Global => PivotScope::Global,
        ScopeArg::PerPair => PivotScope::PerPair,
    };
    let matrix: DistanceMatrixF64 = distance_matrix(&models, &table, scope)?;
    let path = args.output.clone().unwrap_or_else(|| out.join("matrix.json"));
    ensure_parent(&path)?;
    matrix.save_json(&path)?;
    if let Some(tsv) = &args.tsv {
        ensure_parent(tsv)?;
        matrix.save_tsv(tsv)?;
    }
    println!("{}", path.display());
    Ok(())
}

fn cluster(config: Option<&RunConfig>, args: &ClusterArgs, out: &Path) -> anyhow::Result<()> {
    let matrix = if args.input.extension().is_some_and(|e| e == "tsv") {
        let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
        DistanceMatrixF64::from_tsv(&text)?
    } else {
        DistanceMatrixF64::load_json(&args.input)?
    };
    let tree = upgma(&matrix)?;
    let annotations_path = args.annotations.clone().or_else(|| {
        config.and_then(|c| {
            c.natural
                .as_ref()
                .and_then(|n| n.annotations.clone())
                .or_else(|| c.genome.as_ref().and_then(|g| g.annotations.clone()))
        })
    });
    let annotations = annotations_path.as_deref().map(Annotations::load).transpose()?;
    let newick = args.newick.clone().unwrap_or_else(|| out.join("tree.nwk"));
    ensure_parent(&newick)?;
    fs::write(&newick, to_newick(&tree) + "\n").with_context(|| format!("writing {}", newick.display()))?;
    for (path, format) in [(&args.svg, RenderFormat::Svg), (&args.dot, RenderFormat::Dot)] {
        if let Some(path) = path {
            let rendered = render_dendrogram(&tree, format, annotations.as_ref());
            for w in &rendered.warnings {
                eprintln!("warning: {w}");
            }
            ensure_parent(path)?;
            fs::write(path, rendered.document).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    println!("{}", newick.display());
    Ok(())
}

fn run(cli: &Cli, config: Option<RunConfig>) -> anyhow::Result<()> {
    let Some(mut config) = config else {
        return Err(Error::Config("run needs --config".into()).into());
    };
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    let manifest = match config.workflow {
        Workflow::Natural => run_natural(&config)?,
        Workflow::Genome => run_genome(&config)?,
    };
    eprintln!(
        "{} artifacts, {} cache hits, {} misses",
        manifest.artifacts.len(),
        manifest.cache.hits,
        manifest.cache.misses
    );
    println!("{}", config.out.join(weld::pipeline::MANIFEST_FILE).display());
    Ok(())
}
