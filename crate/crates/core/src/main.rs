//! `topicorpus` command line: one subcommand per pipeline stage.
//!
//! Exit codes: 0 success, 1 runtime failure (stderr names the stage),
//! 2 usage or configuration error.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use topicorpus::analytics::{self, AdapterSettings, ReportFormat};
use topicorpus::config::RunConfig;
use topicorpus::corpus::{
    self, classify_subreddits, suggest_lists, AuthorHasher, CollectOptions, Collector, Corpus, CorpusError,
    DumpInputs, LexiconRef, SubredditLists, SubredditTally, SuggestOptions, TitleMatcher,
};
use topicorpus::ingest::{DumpChain, SubmissionRecord};
use topicorpus::lexicon::{self, read_lexicon, run_pipeline, write_json_atomic, PipelineContext};
use topicorpus::llm_gateway::Gateway;
use topicorpus::page_source::{PageCache, PageSource};
use topicorpus::threads;

const INVOCATION_FILE: &str = "invocation.json";

#[derive(Parser, Debug)]
#[command(name = "topicorpus", version, about = "Topic lexicons, dump collection, threads and analytics")]
struct Cli {
    /// Shared JSON configuration file; defaults apply to anything omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (overrides the configuration).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case", tag = "command")]
enum Command {
    /// Build a keyword lexicon from seed terms.
    ExtractKeywords(ExtractArgs),
    /// Count lexicon-matching submissions per subreddit.
    RankSubreddits(RankArgs),
    /// Collect a corpus from dumps using a lexicon and subreddit lists.
    Collect(CollectArgs),
    /// Derive a topic subset of a corpus.
    Subset(SubsetArgs),
    /// Reconstruct conversation trees of a corpus.
    Threads(ThreadsArgs),
    /// Compute every series over a corpus.
    Analyze(AnalyzeArgs),
    /// Emit plot-ready files from an analysis bundle.
    Report(ReportArgs),
}

#[derive(Args, Debug, Serialize)]
struct ExtractArgs {
    /// Seed terms, comma separated or repeated.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    seeds: Vec<String>,
    /// Topic phrase used in the prompts.
    #[arg(long)]
    topic: Option<String>,
    /// Output directory for lexicon.json and run_metadata.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct RankArgs {
    #[arg(long)]
    lexicon: PathBuf,
    /// Dump files or directories.
    #[arg(long, required = true, num_args = 1..)]
    dumps: Vec<PathBuf>,
    /// Write the full ranking as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a draft subreddit-lists file to this path.
    #[arg(long)]
    suggest: Option<PathBuf>,
    /// Rows printed to stdout.
    #[arg(long, default_value_t = 30)]
    top: usize,
}

#[derive(Args, Debug, Serialize)]
struct CollectArgs {
    #[arg(long)]
    lexicon: PathBuf,
    /// Dump files or directories; falls back to the configuration.
    #[arg(long, num_args = 1..)]
    dumps: Vec<PathBuf>,
    /// JSON file with `centric` and `inclusive` lists.
    #[arg(long)]
    subreddits_config: Option<PathBuf>,
    /// Also match keywords against submission bodies.
    #[arg(long)]
    match_selftext: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SubsetArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    subset_lexicon: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ThreadsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum AdapterKind {
    Stub,
    FileExchange,
}

#[derive(Args, Debug, Serialize)]
struct AnalyzeArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Overrides the configured adapter.
    #[arg(long, value_enum)]
    adapter: Option<AdapterKind>,
    /// Exchange directory for the file-exchange adapter.
    #[arg(long)]
    exchange_dir: Option<PathBuf>,
    /// Runner invoked as `<cmd> <requests> <responses>`; split on spaces.
    #[arg(long)]
    adapter_command: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct ReportArgs {
    /// analysis.json or the directory holding it.
    #[arg(long)]
    analysis: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Defaults to `report/` next to the analysis bundle.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure tagged with the stage it happened in.
struct Failure {
    stage: String,
    message: String,
    code: u8,
}

impl Failure {
    fn at(stage: impl Display) -> impl FnOnce(&dyn Display) -> Failure {
        let stage = stage.to_string();
        move |e| Failure {
            stage,
            message: e.to_string(),
            code: 1,
        }
    }

    fn usage(message: impl Display) -> Failure {
        Failure {
            stage: "config".into(),
            message: message.to_string(),
            code: 2,
        }
    }
}

trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T, Failure>;
}

impl<T, E: Display> StageExt<T> for Result<T, E> {
    fn stage(self, stage: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure::at(stage)(&e))
    }
}

#[derive(Serialize)]
struct Invocation<'a> {
    #[serde(flatten)]
    command: &'a Command,
    config: serde_json::Value,
}

fn write_invocation(dir: &Path, command: &Command, config: &RunConfig) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).stage("persist")?;
    write_json_atomic(
        &dir.join(INVOCATION_FILE),
        &Invocation {
            command,
            config: config.snapshot(),
        },
    )
    .stage("persist")
}

fn load_keywords(path: &Path) -> Result<Vec<String>, Failure> {
    let entries = read_lexicon(path).stage("lexicon")?;
    Ok(entries.into_iter().map(|e| e.keyword).collect())
}

fn hasher(config: &RunConfig) -> Result<AuthorHasher, Failure> {
    match std::env::var(&config.salt_env) {
        Ok(salt) => AuthorHasher::new(&salt).stage("anonymize"),
        Err(_) => Err(Failure::at("anonymize")(&format!(
            "author salt missing: set {}",
            config.salt_env
        ))),
    }
}

fn extract_keywords(args: &ExtractArgs, config: &RunConfig, jobs: usize) -> Result<(), Failure> {
    let mut lex = config.lexicon.clone();
    lex.seed_terms = args.seeds.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if let Some(topic) = &args.topic {
        lex.topic = topic.clone();
    }
    lex.validate().map_err(Failure::usage)?;
    let provider = config.provider.build().stage("provider")?;
    let gateway = Gateway::new(provider, lex.retry);
    let cache = match &config.pages.cache_dir {
        Some(dir) => Some(PageCache::new(dir).stage("fetch")?),
        None => None,
    };
    let pages = PageSource::new(config.pages.backend.build(), cache);
    let ctx = PipelineContext {
        gateway: &gateway,
        pages: &pages,
        work_dir: config.pages.work_dir.clone(),
        jobs,
        provider_label: serde_json::to_string(&config.provider).unwrap_or_default(),
        temperature: config.provider.temperature(),
    };
    let output = run_pipeline(&lex, &ctx).map_err(|e| match e {
        lexicon::LexiconError::InvalidConfig(m) => Failure::usage(m),
        other => Failure {
            stage: other.stage().map(|s| s.to_string()).unwrap_or_else(|| "extract".into()),
            message: other.to_string(),
            code: 1,
        },
    })?;
    output.write(&args.out).stage("persist")?;
    println!(
        "{} keywords from {} pages -> {}",
        output.lexicon.entries.len(),
        output.metadata.kept_pages.len(),
        args.out.join("lexicon.json").display()
    );
    Ok(())
}

fn rank(args: &RankArgs, config: &RunConfig) -> Result<(), Failure> {
    let keywords = load_keywords(&args.lexicon)?;
    let matcher = TitleMatcher::new(&keywords).stage("lexicon")?;
    let inputs = DumpInputs::discover(&args.dumps).stage("ingest")?;
    let mut tally = SubredditTally::default();
    let mut chain: DumpChain<SubmissionRecord> = DumpChain::new(inputs.submissions.clone(), &config.collect.ingest);
    for record in &mut chain {
        let s = record.stage("ingest")?;
        tally.add(&s.subreddit, matcher.is_match(&s.title));
    }
    let profiles = classify_subreddits(tally.into_profiles(), &config.subreddits).stage("rank")?;
    let stats = chain.total_stats();
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "rank\tsubreddit\tmatched\ttotal\tcategory");
    for (i, p) in profiles.iter().take(args.top).enumerate() {
        let category = p
            .category
            .map(|c| serde_json::to_value(c).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            i + 1,
            p.name,
            p.matched_submissions,
            p.total_submissions_seen,
            category
        );
    }
    let _ = writeln!(
        out,
        "lines_read={} records={} skipped={}",
        stats.lines_read, stats.records_parsed, stats.lines_skipped_malformed
    );
    if let Some(path) = &args.out {
        write_json_atomic(path, &profiles).stage("persist")?;
    }
    if let Some(path) = &args.suggest {
        let draft = suggest_lists(&profiles, &SuggestOptions::default());
        write_json_atomic(path, &draft).stage("persist")?;
    }
    Ok(())
}

fn collect(args: &CollectArgs, config: &RunConfig, command: &Command) -> Result<(), Failure> {
    let out = args
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .ok_or_else(|| Failure::usage("--out is required (or set out_dir in the configuration)"))?;
    let lists = match &args.subreddits_config {
        Some(path) => {
            let raw = std::fs::read(path).stage("config")?;
            serde_json::from_slice::<SubredditLists>(&raw)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => config.subreddits.clone(),
    };
    lists.classifier().map_err(Failure::usage)?;
    let dumps = if args.dumps.is_empty() { config.dumps.clone() } else { args.dumps.clone() };
    if dumps.is_empty() {
        return Err(Failure::usage("no dumps given (--dumps or dumps in the configuration)"));
    }
    let keywords = load_keywords(&args.lexicon)?;
    let matcher = TitleMatcher::new(&keywords).stage("lexicon")?;
    let hasher = hasher(config)?;
    let inputs = DumpInputs::discover(&dumps).stage("ingest")?;
    let options = CollectOptions {
        match_selftext: args.match_selftext || config.collect.match_selftext,
        ingest: config.collect.ingest.clone(),
    };
    let mut snapshot = config.clone();
    snapshot.subreddits = lists.clone();
    snapshot.collect = options.clone();
    let collector = Collector {
        lists: &lists,
        matcher: &matcher,
        hasher: &hasher,
        options: &options,
        lexicon: LexiconRef::new(&keywords, Some(args.lexicon.display().to_string())),
        config: snapshot.snapshot(),
    };
    let manifest = collector.collect(&inputs, &out).map_err(|e| match e {
        CorpusError::Ingest(e) => Failure::at("ingest")(&e),
        other => Failure::at("collect")(&other),
    })?;
    write_invocation(&out, command, &snapshot)?;
    let c = &manifest.counts;
    println!("class\tsubmissions\tcomments");
    println!("centric\t{}\t{}", c.submissions.centric, c.comments.centric);
    println!("inclusive\t{}\t{}", c.submissions.inclusive, c.comments.inclusive);
    println!("total\t{}\t{}", c.submissions.total, c.comments.total);
    Ok(())
}

fn subset(args: &SubsetArgs, config: &RunConfig, command: &Command) -> Result<(), Failure> {
    let parent = Corpus::open(&args.corpus).stage("subset")?;
    let keywords = load_keywords(&args.subset_lexicon)?;
    let matcher = TitleMatcher::new(&keywords).stage("lexicon")?;
    let manifest = corpus::derive_subset(
        &parent,
        &matcher,
        LexiconRef::new(&keywords, Some(args.subset_lexicon.display().to_string())),
        config.snapshot(),
        &args.out,
    )
    .stage("subset")?;
    write_invocation(&args.out, command, config)?;
    println!(
        "subset: {} of {} submissions, {} of {} comments",
        manifest.counts.submissions.total,
        parent.manifest.counts.submissions.total,
        manifest.counts.comments.total,
        parent.manifest.counts.comments.total
    );
    Ok(())
}

fn build_threads(args: &ThreadsArgs, config: &RunConfig, command: &Command) -> Result<(), Failure> {
    let corpus = Corpus::open(&args.corpus).stage("threads")?;
    let submissions = corpus.load_submissions().stage("threads")?;
    let comments = corpus.load_comments().stage("threads")?;
    let (conversations, stats) = threads::assemble(submissions, comments);
    std::fs::create_dir_all(&args.out).stage("persist")?;

    let path = args.out.join("conversations.ndjson");
    let mut tmp = tempfile::NamedTempFile::new_in(&args.out).stage("persist")?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        for c in &conversations {
            serde_json::to_writer(&mut w, c).stage("persist")?;
            w.write_all(b"\n").stage("persist")?;
        }
        w.flush().stage("persist")?;
    }
    tmp.persist(&path).map_err(|e| e.error).stage("persist")?;

    let buckets = threads::length_histogram(conversations.iter().map(|c| c.length), config.analysis.options.bucketing);
    let mut csv = Vec::new();
    threads::write_histogram_csv(&mut csv, &buckets).stage("persist")?;
    let hist = args.out.join("conversation_lengths.csv");
    let mut tmp = tempfile::NamedTempFile::new_in(&args.out).stage("persist")?;
    tmp.write_all(&csv).stage("persist")?;
    tmp.persist(&hist).map_err(|e| e.error).stage("persist")?;

    #[derive(Serialize)]
    struct ThreadSummary<'a> {
        corpus_manifest_sha256: &'a str,
        stats: &'a threads::AssemblyStats,
        comments_in_trees: usize,
        orphans: usize,
        cycle_breaks: usize,
    }
    write_json_atomic(
        &args.out.join("threads_summary.json"),
        &ThreadSummary {
            corpus_manifest_sha256: corpus.manifest_sha256(),
            stats: &stats,
            comments_in_trees: conversations.iter().map(|c| c.length).sum(),
            orphans: conversations.iter().map(|c| c.orphan_count).sum(),
            cycle_breaks: conversations.iter().map(|c| c.cycle_breaks).sum(),
        },
    )
    .stage("persist")?;
    write_invocation(&args.out, command, config)?;
    println!(
        "{} conversations, {} comments attached, {} unattached",
        stats.conversations, stats.comments_attached, stats.comments_unattached
    );
    Ok(())
}

fn analyze(args: &AnalyzeArgs, config: &RunConfig, command: &Command) -> Result<(), Failure> {
    let mut snapshot = config.clone();
    match args.adapter {
        Some(AdapterKind::Stub) => snapshot.analysis.adapter = AdapterSettings::Stub,
        Some(AdapterKind::FileExchange) => {
            let dir = args
                .exchange_dir
                .clone()
                .ok_or_else(|| Failure::usage("--adapter file-exchange needs --exchange-dir"))?;
            let command = args
                .adapter_command
                .as_ref()
                .map(|c| c.split_whitespace().map(str::to_string).collect());
            snapshot.analysis.adapter = AdapterSettings::FileExchange { dir, command };
        }
        None => {}
    }
    let adapter = snapshot.analysis.adapter.build().stage("classify")?;
    let corpus = Corpus::open(&args.corpus).stage("analyze")?;
    let bundle = analytics::analyze_corpus(&corpus, adapter.as_ref(), &snapshot.analysis.options, snapshot.snapshot())
        .map_err(|e| match e {
            analytics::AnalyticsError::AdapterUnavailable(_) | analytics::AnalyticsError::Schema(_) => {
                Failure::at("classify")(&e)
            }
            other => Failure::at("analyze")(&other),
        })?;
    let path = analytics::write_bundle(&args.out, &bundle).stage("persist")?;
    write_invocation(&args.out, command, &snapshot)?;
    println!(
        "{} submissions, {} comments, {} classified, {} failed -> {}",
        bundle.daily_submissions.total(),
        bundle.daily_comments.total(),
        bundle.classification.classified,
        bundle.classification.failed,
        path.display()
    );
    Ok(())
}

fn report(args: &ReportArgs) -> Result<(), Failure> {
    let bundle = analytics::read_bundle(&args.analysis).stage("report")?;
    let analysis_path = if args.analysis.is_dir() {
        args.analysis.join(analytics::ANALYSIS_FILE)
    } else {
        args.analysis.clone()
    };
    let out = args.out.clone().unwrap_or_else(|| {
        analysis_path.parent().unwrap_or(Path::new(".")).join("report")
    });
    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    let files = analytics::write_report(&bundle, &analysis_path, &out, format).stage("report")?;
    println!("{} files -> {}", files.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::usage)?,
        None => RunConfig::default(),
    };
    if cli.jobs.is_some() {
        config.jobs = cli.jobs;
    }
    config.validate().map_err(Failure::usage)?;
    let jobs = config.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .stack_size(64 << 20)
        .build_global()
        .stage("config")?;

    match &cli.command {
        Command::ExtractKeywords(a) => {
            let r = extract_keywords(a, &config, jobs);
            if r.is_ok() {
                write_invocation(&a.out, &cli.command, &config)?;
            }
            r
        }
        Command::RankSubreddits(a) => rank(a, &config),
        Command::Collect(a) => collect(a, &config, &cli.command),
        Command::Subset(a) => subset(a, &config, &cli.command),
        Command::Threads(a) => build_threads(a, &config, &cli.command),
        Command::Analyze(a) => analyze(a, &config, &cli.command),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.verbose { "info" } else { "warn" }))
        .init();
    // Deep reply chains are serialized recursively.
    let worker = std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(move || run(cli))
        .expect("spawn main worker");
    match worker.join() {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: stage {}: {}", f.stage, f.message);
            ExitCode::from(f.code)
        }
        Err(_) => {
            eprintln!("error: stage internal: worker panicked");
            ExitCode::from(1)
        }
    }
}
