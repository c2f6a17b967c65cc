use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regex::Regex;

use corpus_lens::corpus::{load_corpus, Corpus, HeaderRule, Layout, LoadOptions};
use corpus_lens::mds::{ChapterMetric, SmacofOptions};
use corpus_lens::network::{build_cooccurrence, export_graph_with, prune, ExportOptions, GraphFormat};
use corpus_lens::report::config::{LayoutKind, MdsMode, RunOverrides, TokenizerMode};
use corpus_lens::report::pipeline::{embed, sentiment_summary, MdsReport};
use corpus_lens::report::{run_pipeline, tables, RunConfig};
use corpus_lens::sentiment::{chapter_series, histogram, score_corpus, PolarityLexicon};
use corpus_lens::stats::{chapter_keywords, pos_frequency, TermDocMatrix, Vocabulary};
use corpus_lens::tokenize::{import_tokens, tokenize_corpus, Pos, SegmentationLexicon, TagSet, TokenizedCorpus};

#[derive(Parser)]
#[command(name = "corpus-lens", version, about = "Frequency, keyword, sentiment, network and MDS views of a chaptered corpus")]
struct Cli {
    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read chapter files into corpus JSON.
    Ingest(IngestArgs),
    /// Split corpus sentences into tokens.
    Tokenize(TokenizeArgs),
    /// Top lemmas for one part of speech.
    Freq(FreqArgs),
    /// Top tf-idf keywords per chapter.
    Tfidf(TfidfArgs),
    /// Sentence polarity histogram, chapter series and summary.
    Sentiment(SentimentArgs),
    /// Word co-occurrence graph.
    Network(NetworkArgs),
    /// Two-dimensional embedding of chapters or lemmas.
    Mds(MdsArgs),
    /// Every stage from a TOML run configuration.
    Run(Box<RunArgs>),
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    PerFile,
    SingleFile,
}

impl From<LayoutArg> for LayoutKind {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::PerFile => LayoutKind::PerFile,
            LayoutArg::SingleFile => LayoutKind::SingleFile,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Chapters,
    Lemmas,
}

impl From<ModeArg> for MdsMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Chapters => MdsMode::Chapters,
            ModeArg::Lemmas => MdsMode::Lemmas,
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    root: PathBuf,
    #[arg(long, value_enum, default_value = "per-file")]
    layout: LayoutArg,
    /// Chapter delimiter line for the single-file layout.
    #[arg(long)]
    delimiter_pattern: Option<String>,
    /// Lines matching this are dropped as headers.
    #[arg(long)]
    header_pattern: Option<String>,
    #[arg(long)]
    source_label: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["lexicon", "import"]))]
struct TokenizeArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Segmentation lexicon, `surface<TAB>pos<TAB>lemma`.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Pre-tokenized text in the interchange format.
    #[arg(long)]
    import: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FreqArgs {
    #[arg(long)]
    tokens: PathBuf,
    #[arg(long, default_value = "名詞")]
    pos: String,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    top: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TfidfArgs {
    #[arg(long)]
    tokens: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Vocabulary tags; `*` keeps every token.
    #[arg(long, value_delimiter = ',', default_value = "名詞,動詞,形容詞")]
    pos: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SentimentArgs {
    #[arg(long)]
    tokens: PathBuf,
    /// Polarity lexicon, `surface:reading:pos:score`.
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    out_hist: Option<PathBuf>,
    #[arg(long)]
    out_series: Option<PathBuf>,
    #[arg(long)]
    out_summary: Option<PathBuf>,
    #[arg(long)]
    out_sentences: Option<PathBuf>,
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long)]
    tokens: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "名詞,動詞,形容詞")]
    keep_pos: Vec<String>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    min_node_freq: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    min_edge_weight: u64,
    #[arg(long)]
    top_k_nodes: Option<usize>,
    #[arg(long, default_value = "dot")]
    format: GraphFormat,
    /// Add pmi and jaccard edge attributes.
    #[arg(long)]
    derived: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MdsArgs {
    #[arg(long)]
    tokens: PathBuf,
    #[arg(long, value_enum, default_value = "chapters")]
    mode: ModeArg,
    #[arg(long, default_value = "cosine")]
    metric: ChapterMetric,
    /// `smacof` or `none`.
    #[arg(long, default_value = "smacof", value_parser = ["smacof", "none"])]
    refine: String,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[arg(long, default_value_t = 50)]
    top_lemmas: usize,
    #[arg(long, value_delimiter = ',', default_value = "名詞,動詞,形容詞")]
    pos: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to `diagnostics.json` beside the coordinates.
    #[arg(long)]
    out_diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
    #[arg(long)]
    delimiter_pattern: Option<String>,
    #[arg(long)]
    header_pattern: Option<String>,
    #[arg(long)]
    source_label: Option<String>,
    #[arg(long)]
    segmentation_lexicon: Option<PathBuf>,
    /// Use pre-tokenized input instead of the segmentation lexicon.
    #[arg(long)]
    import: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    freq_pos: Option<Vec<String>>,
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    tfidf_pos: Option<Vec<String>>,
    #[arg(long)]
    polarity_lexicon: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    keep_pos: Option<Vec<String>>,
    #[arg(long)]
    min_node_freq: Option<u64>,
    #[arg(long)]
    min_edge_weight: Option<u64>,
    #[arg(long)]
    top_k_nodes: Option<usize>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    derived: Option<bool>,
    #[arg(long, value_enum)]
    mds_mode: Option<ModeArg>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    refine: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    top_lemmas: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            output_dir: self.out_dir.clone(),
            corpus_root: self.root.clone(),
            layout: self.layout.map(Into::into),
            delimiter_pattern: self.delimiter_pattern.clone(),
            header_pattern: self.header_pattern.clone(),
            source_label: self.source_label.clone(),
            tokenizer_mode: if self.import.is_some() {
                Some(TokenizerMode::Import)
            } else if self.segmentation_lexicon.is_some() {
                Some(TokenizerMode::Lexicon)
            } else {
                None
            },
            segmentation_lexicon: self.segmentation_lexicon.clone(),
            import: self.import.clone(),
            freq_pos: self.freq_pos.clone(),
            top_n: self.top_n,
            k: self.k,
            tfidf_pos: self.tfidf_pos.clone(),
            polarity_lexicon: self.polarity_lexicon.clone(),
            keep_pos: self.keep_pos.clone(),
            min_node_freq: self.min_node_freq,
            min_edge_weight: self.min_edge_weight,
            top_k_nodes: self.top_k_nodes,
            format: self.format.clone(),
            derived: self.derived,
            mds_mode: self.mds_mode.map(Into::into),
            metric: self.metric.clone(),
            refine: self.refine.clone(),
            max_iter: self.max_iter,
            eps: self.eps,
            top_lemmas: self.top_lemmas,
        }
    }
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Bad input before any work starts: exit 1.
    Invalid(String),
    /// A stage failed while running: exit 2.
    Stage(String),
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn failed<E: std::fmt::Display>(stage: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Stage(format!("{stage}: {e}"))
}

fn require(path: &Path) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(invalid(format!("{} does not exist", path.display())))
    }
}

fn default_out(name: &str) -> PathBuf {
    std::env::var_os("CORPUS_LENS_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
        .join(name)
}

fn write(path: &Path, content: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(failed("write"))?;
    }
    fs::write(path, content).map_err(|e| Failure::Stage(format!("write {}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn read_tokens(path: &Path) -> Result<TokenizedCorpus, Failure> {
    require(path)?;
    let text = fs::read_to_string(path).map_err(failed("read tokens"))?;
    TokenizedCorpus::from_json(&text).map_err(failed("read tokens"))
}

fn pos_vocabulary(tags: &[String]) -> Vocabulary {
    if tags.iter().any(|t| t == "*") {
        Vocabulary::All
    } else {
        Vocabulary::Pos(pos_set(tags))
    }
}

fn pos_set(tags: &[String]) -> BTreeSet<Pos> {
    tags.iter().map(|t| Pos::from(t.as_str())).collect()
}

macro_rules! json {
    ($value:expr) => {{
        let mut s = serde_json::to_string_pretty(&$value).expect("serialize");
        s.push('\n');
        s
    }};
}

fn ingest(a: IngestArgs) -> Result<(), Failure> {
    require(&a.root)?;
    let layout = match a.layout {
        LayoutArg::PerFile => Layout::PerFile,
        LayoutArg::SingleFile => {
            let p = a
                .delimiter_pattern
                .as_deref()
                .ok_or_else(|| invalid("--delimiter-pattern is required with --layout single-file"))?;
            Layout::SingleFile {
                delimiter: compile(p)?,
            }
        }
    };
    let header = match a.header_pattern.as_deref() {
        Some(p) => HeaderRule::Pattern(compile(p)?),
        None => HeaderRule::default(),
    };
    let options = LoadOptions {
        layout,
        header,
        source_label: a.source_label,
    };
    let corpus = load_corpus(&a.root, &options).map_err(failed("ingest"))?;
    let mut text = corpus.to_json();
    text.push('\n');
    write(&a.out.unwrap_or_else(|| default_out("corpus.json")), &text)
}

fn tokenize(a: TokenizeArgs) -> Result<(), Failure> {
    require(&a.corpus)?;
    let corpus_text = fs::read_to_string(&a.corpus).map_err(failed("tokenize"))?;
    let corpus = Corpus::from_json(&corpus_text).map_err(failed("tokenize"))?;
    let tokens = match (&a.lexicon, &a.import) {
        (Some(lexicon), _) => {
            require(lexicon)?;
            let lexicon = SegmentationLexicon::load(lexicon).map_err(failed("tokenize"))?;
            tokenize_corpus(&corpus, &lexicon).map_err(failed("tokenize"))?
        }
        (None, Some(import)) => {
            require(import)?;
            let stream = fs::read_to_string(import).map_err(failed("tokenize"))?;
            import_tokens(&stream, &corpus, &TagSet::default()).map_err(failed("tokenize"))?
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let mut text = tokens.to_json();
    text.push('\n');
    write(&a.out.unwrap_or_else(|| default_out("tokens.json")), &text)
}

fn freq(a: FreqArgs) -> Result<(), Failure> {
    let tokens = read_tokens(&a.tokens)?;
    let table = pos_frequency(&tokens, &Pos::from(a.pos.as_str()), a.top as usize);
    write(&a.out.unwrap_or_else(|| default_out("freq.csv")), &tables::frequency_csv(&table))
}

fn tfidf(a: TfidfArgs) -> Result<(), Failure> {
    let tokens = read_tokens(&a.tokens)?;
    let matrix = TermDocMatrix::from_tokens(&tokens, &pos_vocabulary(&a.pos));
    let keywords = chapter_keywords(&matrix, a.k as usize);
    write(&a.out.unwrap_or_else(|| default_out("keywords.csv")), &tables::keywords_csv(&keywords))
}

fn sentiment(a: SentimentArgs) -> Result<(), Failure> {
    let tokens = read_tokens(&a.tokens)?;
    require(&a.lexicon)?;
    let lexicon = PolarityLexicon::load(&a.lexicon).map_err(failed("sentiment"))?;
    let scores = score_corpus(&tokens, &lexicon);
    let chapters: Vec<u32> = tokens.chapters.iter().map(|c| c.index).collect();
    let titles: Vec<(u32, String)> = tokens.chapters.iter().map(|c| (c.index, c.title.clone())).collect();
    write(
        &a.out_hist.unwrap_or_else(|| default_out("hist.csv")),
        &tables::histogram_csv(&histogram(&scores)),
    )?;
    write(
        &a.out_series.unwrap_or_else(|| default_out("series.csv")),
        &tables::series_csv(&chapter_series(&chapters, &scores), &titles),
    )?;
    write(
        &a.out_summary.unwrap_or_else(|| default_out("summary.json")),
        &json!(sentiment_summary(&tokens, &scores, &lexicon)),
    )?;
    if let Some(path) = a.out_sentences {
        write(&path, &tables::sentence_scores_csv(&scores))?;
    }
    Ok(())
}

fn network(a: NetworkArgs) -> Result<(), Failure> {
    let tokens = read_tokens(&a.tokens)?;
    let graph = build_cooccurrence(&tokens, &pos_set(&a.keep_pos), a.min_node_freq);
    let graph = prune(&graph, a.min_edge_weight, a.top_k_nodes);
    let text = export_graph_with(&graph, a.format, ExportOptions { derived: a.derived });
    let out = a
        .out
        .unwrap_or_else(|| default_out(&format!("graph.{}", a.format.extension())));
    write(&out, &text)
}

fn mds(a: MdsArgs) -> Result<(), Failure> {
    let tokens = read_tokens(&a.tokens)?;
    if !(a.eps >= 0.0 && a.eps.is_finite()) {
        return Err(invalid("--eps must be a finite non-negative number"));
    }
    let refine = (a.refine == "smacof").then_some(SmacofOptions {
        max_iter: a.max_iter,
        eps: a.eps,
    });
    let mode: MdsMode = a.mode.into();
    let embedding = embed(&tokens, &pos_vocabulary(&a.pos), mode, a.metric, a.top_lemmas, refine)
        .map_err(failed("mds"))?;
    let out = a.out.unwrap_or_else(|| default_out("coords.csv"));
    let diagnostics_path = a.out_diagnostics.unwrap_or_else(|| out.with_file_name("diagnostics.json"));
    write(&out, &tables::coords_csv(&embedding))?;
    let metric = match a.metric {
        ChapterMetric::Cosine => "cosine",
        ChapterMetric::CosineCounts => "cosine-counts",
        ChapterMetric::Euclidean => "euclidean",
    };
    let report = MdsReport {
        mode: mode.as_str(),
        metric,
        refine: &a.refine,
        diagnostics: &embedding.diagnostics,
    };
    write(&diagnostics_path, &json!(report))
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let mut config = RunConfig::load(&a.config).map_err(|e| invalid(e.to_string()))?;
    config.apply(&a.overrides());
    let manifest = run_pipeline(&config).map_err(|e| {
        if e.exit_code() == 1 {
            invalid(e.to_string())
        } else {
            Failure::Stage(e.to_string())
        }
    })?;
    log::info!("{} artifacts", manifest.artifacts.len());
    Ok(())
}

fn compile(pattern: &str) -> Result<Regex, Failure> {
    Regex::new(pattern).map_err(|e| invalid(format!("bad pattern {pattern:?}: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Tokenize(a) => tokenize(a),
        Command::Freq(a) => freq(a),
        Command::Tfidf(a) => tfidf(a),
        Command::Sentiment(a) => sentiment(a),
        Command::Network(a) => network(a),
        Command::Mds(a) => mds(a),
        Command::Run(a) => run(*a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Stage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
