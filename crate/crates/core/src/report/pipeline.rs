//! End-to-end run: ingest, tokenize, analyse, chart, and a hashed manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::chart::{render_chart, ChartData, ChartSpec, ScatterPoint};
use super::config::{ConfigError, MdsMode, RunConfig, TokenizerMode};
use super::tables;
use crate::corpus::{corpus_stats, load_corpus, Corpus};
use crate::mds::{
    chapter_dissimilarity, classical_mds, lemma_dissimilarity, smacof, ChapterMetric, Embedding2D,
    MdsDiagnostics, MdsError, SmacofOptions,
};
use crate::network::{build_cooccurrence, export_graph_with, prune, ExportOptions};
use crate::sentiment::{
    chapter_series, histogram, polarity_fractions, score_corpus, word_polarity_counts,
    PolarityFractions, PolarityLexicon, SentenceScore, WordPolarityCounts,
};
use crate::stats::{chapter_keywords, pos_frequency, FrequencyTable, TermDocMatrix, Vocabulary};
use crate::tokenize::{import_tokens, tokenize_corpus, Pos, SegmentationLexicon, TagSet, TokenizedCorpus};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: BoxError,
    },
}

impl PipelineError {
    /// 1 for configuration problems, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Stage { .. } => 2,
        }
    }
}

fn stage<T, E: Into<BoxError>>(name: &'static str, r: Result<T, E>) -> Result<T, PipelineError> {
    r.map_err(|e| PipelineError::Stage {
        stage: name,
        source: e.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn get(&self, path: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.path == path)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialize");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory: the config value, else `CORPUS_LENS_OUT`, else `out`.
pub fn output_dir(config: &RunConfig) -> PathBuf {
    config
        .output_dir
        .clone()
        .or_else(|| std::env::var_os("CORPUS_LENS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Writer {
    fn put(&mut self, name: &str, content: &str) -> Result<(), PipelineError> {
        stage("write", fs::write(self.dir.join(name), content))?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
            bytes: content.len() as u64,
        });
        Ok(())
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialize");
    s.push('\n');
    s
}

/// Tokens for the corpus, from the segmentation lexicon or an imported stream.
pub fn tokenize_stage(config: &RunConfig, corpus: &Corpus) -> Result<TokenizedCorpus, PipelineError> {
    match config.tokenizer.mode {
        TokenizerMode::Lexicon => {
            let path = config.tokenizer.lexicon.as_deref().expect("validated");
            let lexicon = stage("tokenize", SegmentationLexicon::load(path))?;
            stage("tokenize", tokenize_corpus(corpus, &lexicon))
        }
        TokenizerMode::Import => {
            let path = config.tokenizer.import.as_deref().expect("validated");
            let text = stage("tokenize", fs::read_to_string(path))?;
            stage("tokenize", import_tokens(&text, corpus, &TagSet::default()))
        }
    }
}

/// Short ASCII names for the common tags, used in chart file names.
pub fn pos_slug(pos: &Pos) -> String {
    match pos.as_str() {
        Pos::NOUN => "noun".into(),
        Pos::VERB => "verb".into(),
        Pos::ADJECTIVE => "adjective".into(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SentimentSummary {
    pub sentences: usize,
    pub scored: usize,
    pub unscored: usize,
    /// Absent when no sentence matched the lexicon.
    pub fractions: Option<PolarityFractions>,
    pub words: WordPolarityCounts,
    pub word_negative_share: Option<f64>,
    pub lexicon_skipped: usize,
}

pub fn sentiment_summary(
    tokens: &TokenizedCorpus,
    scores: &[SentenceScore],
    lexicon: &PolarityLexicon,
) -> SentimentSummary {
    let words = word_polarity_counts(tokens, lexicon);
    let scored = scores.iter().filter(|s| s.score.is_some()).count();
    SentimentSummary {
        sentences: scores.len(),
        scored,
        unscored: scores.len() - scored,
        fractions: polarity_fractions(scores).ok(),
        words,
        word_negative_share: words.negative_share(),
        lexicon_skipped: lexicon.skipped(),
    }
}

/// Written next to the coordinates: how the embedding was made and how well it fits.
#[derive(Debug, Clone, Serialize)]
pub struct MdsReport<'a> {
    pub mode: &'static str,
    pub metric: &'a str,
    pub refine: &'a str,
    #[serde(flatten)]
    pub diagnostics: &'a MdsDiagnostics,
}

impl MdsMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MdsMode::Chapters => "chapters",
            MdsMode::Lemmas => "lemmas",
        }
    }
}

/// Chapter or lemma embedding; `refine` runs SMACOF from the classical solution.
pub fn embed(
    tokens: &TokenizedCorpus,
    vocabulary: &Vocabulary,
    mode: MdsMode,
    metric: ChapterMetric,
    top_lemmas: usize,
    refine: Option<SmacofOptions>,
) -> Result<Embedding2D, MdsError> {
    let matrix = TermDocMatrix::from_tokens(tokens, vocabulary);
    let d = match mode {
        MdsMode::Chapters => chapter_dissimilarity(&matrix, metric)?,
        MdsMode::Lemmas => lemma_dissimilarity(&matrix, top_lemmas)?,
    };
    let start = classical_mds(&d)?;
    match refine {
        Some(options) => smacof(&d, &start, options),
        None => Ok(start),
    }
}

fn bar_chart(table: &FrequencyTable) -> ChartSpec {
    ChartSpec::new(
        format!("{} frequency", table.pos),
        "lemma",
        "count",
        ChartData::Bar {
            categories: table.rows.iter().map(|r| r.lemma.clone()).collect(),
            values: table.rows.iter().map(|r| r.count as f64).collect(),
        },
    )
}

/// Runs every stage and writes the outputs into the output directory,
/// finishing with `manifest.json`. Stages run in order and the first failure
/// aborts the run.
pub fn run_pipeline(config: &RunConfig) -> Result<Manifest, PipelineError> {
    let validated = config.validate()?;
    let dir = output_dir(config);
    stage("write", fs::create_dir_all(&dir))?;
    let mut out = Writer {
        dir: dir.clone(),
        artifacts: Vec::new(),
    };

    log::info!("ingest {}", config.corpus.root.display());
    let corpus = stage("ingest", load_corpus(&config.corpus.root, &validated.load))?;
    out.put("stats.json", &tables::corpus_stats_json(&corpus_stats(&corpus)))?;

    log::info!("tokenize");
    let tokens = tokenize_stage(config, &corpus)?;

    log::info!("freq");
    let freq: Vec<FrequencyTable> = validated
        .freq_pos
        .iter()
        .map(|p| pos_frequency(&tokens, p, config.frequency.top_n))
        .collect();
    out.put("freq.csv", &tables::frequency_tables_csv(&freq))?;

    log::info!("tfidf");
    let matrix = TermDocMatrix::from_tokens(&tokens, &validated.tfidf_vocabulary);
    out.put("keywords.csv", &tables::keywords_csv(&chapter_keywords(&matrix, config.tfidf.k)))?;

    log::info!("sentiment");
    let lexicon = stage("sentiment", PolarityLexicon::load(&config.sentiment.lexicon))?;
    let scores = score_corpus(&tokens, &lexicon);
    let hist = histogram(&scores);
    let chapters: Vec<u32> = corpus.chapters.iter().map(|c| c.index).collect();
    let titles: Vec<(u32, String)> = corpus.chapters.iter().map(|c| (c.index, c.title.clone())).collect();
    let series = chapter_series(&chapters, &scores);
    out.put("hist.csv", &tables::histogram_csv(&hist))?;
    out.put("series.csv", &tables::series_csv(&series, &titles))?;
    out.put("sentences.csv", &tables::sentence_scores_csv(&scores))?;
    out.put("sentiment.json", &json(&sentiment_summary(&tokens, &scores, &lexicon)))?;

    log::info!("network");
    let graph = build_cooccurrence(&tokens, &validated.keep_pos, config.network.min_node_freq);
    let graph = prune(&graph, config.network.min_edge_weight, config.network.top_k_nodes);
    let graph_text = export_graph_with(
        &graph,
        validated.format,
        ExportOptions {
            derived: config.network.derived,
        },
    );
    out.put(&format!("graph.{}", validated.format.extension()), &graph_text)?;

    log::info!("mds");
    let refine = validated.refine.then_some(SmacofOptions {
        max_iter: config.mds.max_iter,
        eps: config.mds.eps,
    });
    let embedding = stage(
        "mds",
        embed(
            &tokens,
            &validated.tfidf_vocabulary,
            config.mds.mode,
            validated.metric,
            config.mds.top_lemmas,
            refine,
        ),
    )?;
    out.put("coords.csv", &tables::coords_csv(&embedding))?;
    let report = MdsReport {
        mode: config.mds.mode.as_str(),
        metric: &config.mds.metric,
        refine: &config.mds.refine,
        diagnostics: &embedding.diagnostics,
    };
    out.put("mds-diagnostics.json", &json(&report))?;

    log::info!("charts");
    for table in &freq {
        let svg = stage("charts", render_chart(&bar_chart(table)))?;
        out.put(&format!("freq-{}.svg", pos_slug(&table.pos)), &svg)?;
    }
    let hist_spec = ChartSpec::new(
        "Sentence polarity",
        "score",
        "sentences",
        ChartData::Histogram {
            lower: -1.0,
            bin_width: hist.bin_width,
            counts: hist.counts.clone(),
        },
    );
    out.put("hist.svg", &stage("charts", render_chart(&hist_spec))?)?;
    let points: Vec<(f64, f64)> = series
        .rows
        .iter()
        .filter(|r| !r.empty)
        .map(|r| (r.chapter_index as f64, r.mean))
        .collect();
    if points.is_empty() {
        log::warn!("no chapter has a scored sentence; series.svg skipped");
    } else {
        let spec = ChartSpec::new("Mean polarity by chapter", "chapter", "mean score", ChartData::Line { points })
            .with_y_range(-1.0, 1.0);
        out.put("series.svg", &stage("charts", render_chart(&spec))?)?;
    }
    let scatter = ChartSpec::new(
        "MDS",
        "dimension 1",
        "dimension 2",
        ChartData::Scatter {
            points: embedding
                .labels
                .iter()
                .zip(&embedding.coords)
                .map(|(label, c)| ScatterPoint {
                    label: label.clone(),
                    x: c[0],
                    y: c[1],
                })
                .collect(),
        },
    );
    out.put("coords.svg", &stage("charts", render_chart(&scatter))?)?;

    let mut artifacts = out.artifacts;
    artifacts.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { artifacts };
    stage("write", fs::write(dir.join("manifest.json"), manifest.to_json()))?;
    Ok(manifest)
}

/// Reads a manifest written by [`run_pipeline`].
pub fn read_manifest(dir: &Path) -> Result<Manifest, BoxError> {
    let text = fs::read_to_string(dir.join("manifest.json"))?;
    Ok(serde_json::from_str(&text)?)
}
