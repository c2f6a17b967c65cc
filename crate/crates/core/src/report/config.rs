//! Run configuration: a TOML file plus command-line overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{HeaderRule, Layout, LoadOptions, DEFAULT_HEADER_MAX_CHARS};
use crate::mds::ChapterMetric;
use crate::network::GraphFormat;
use crate::stats::Vocabulary;
use crate::tokenize::Pos;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("{field}: path {path} does not exist")]
    MissingPath { field: &'static str, path: PathBuf },
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutKind {
    #[default]
    PerFile,
    SingleFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub root: PathBuf,
    #[serde(default)]
    pub layout: LayoutKind,
    #[serde(default)]
    pub delimiter_pattern: Option<String>,
    #[serde(default)]
    pub header_pattern: Option<String>,
    #[serde(default)]
    pub source_label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TokenizerMode {
    #[default]
    Lexicon,
    Import,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenizerSection {
    #[serde(default)]
    pub mode: TokenizerMode,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub import: Option<PathBuf>,
}

fn default_freq_pos() -> Vec<String> {
    vec!["名詞".into(), "動詞".into(), "形容詞".into()]
}

fn default_top_n() -> usize {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySection {
    #[serde(default = "default_freq_pos")]
    pub pos: Vec<String>,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
}

impl Default for FrequencySection {
    fn default() -> Self {
        FrequencySection {
            pos: default_freq_pos(),
            top_n: default_top_n(),
        }
    }
}

fn default_k() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfidfSection {
    #[serde(default = "default_k")]
    pub k: usize,
    /// Restrict the vocabulary to these tags; `["*"]` admits every token.
    #[serde(default = "default_freq_pos")]
    pub pos: Vec<String>,
}

impl Default for TfidfSection {
    fn default() -> Self {
        TfidfSection {
            k: default_k(),
            pos: default_freq_pos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentimentSection {
    pub lexicon: PathBuf,
}

fn default_min_node_freq() -> u64 {
    5
}

fn default_min_edge_weight() -> u64 {
    2
}

fn default_format() -> String {
    "dot".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default = "default_freq_pos")]
    pub keep_pos: Vec<String>,
    #[serde(default = "default_min_node_freq")]
    pub min_node_freq: u64,
    #[serde(default = "default_min_edge_weight")]
    pub min_edge_weight: u64,
    #[serde(default)]
    pub top_k_nodes: Option<usize>,
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default)]
    pub derived: bool,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            keep_pos: default_freq_pos(),
            min_node_freq: default_min_node_freq(),
            min_edge_weight: default_min_edge_weight(),
            top_k_nodes: None,
            format: default_format(),
            derived: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MdsMode {
    #[default]
    Chapters,
    Lemmas,
}

fn default_metric() -> String {
    "cosine".into()
}

fn default_refine() -> String {
    "smacof".into()
}

fn default_max_iter() -> usize {
    500
}

fn default_eps() -> f64 {
    1e-9
}

fn default_top_lemmas() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdsSection {
    #[serde(default)]
    pub mode: MdsMode,
    #[serde(default = "default_metric")]
    pub metric: String,
    /// `smacof` or `none`.
    #[serde(default = "default_refine")]
    pub refine: String,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_top_lemmas")]
    pub top_lemmas: usize,
}

impl Default for MdsSection {
    fn default() -> Self {
        MdsSection {
            mode: MdsMode::default(),
            metric: default_metric(),
            refine: default_refine(),
            max_iter: default_max_iter(),
            eps: default_eps(),
            top_lemmas: default_top_lemmas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub corpus: CorpusSection,
    pub tokenizer: TokenizerSection,
    #[serde(default)]
    pub frequency: FrequencySection,
    #[serde(default)]
    pub tfidf: TfidfSection,
    pub sentiment: SentimentSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub mds: MdsSection,
}

/// Command-line values that take precedence over the file. `None` leaves the
/// file value in place.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub output_dir: Option<PathBuf>,
    pub corpus_root: Option<PathBuf>,
    pub layout: Option<LayoutKind>,
    pub delimiter_pattern: Option<String>,
    pub header_pattern: Option<String>,
    pub source_label: Option<String>,
    pub tokenizer_mode: Option<TokenizerMode>,
    pub segmentation_lexicon: Option<PathBuf>,
    pub import: Option<PathBuf>,
    pub freq_pos: Option<Vec<String>>,
    pub top_n: Option<usize>,
    pub k: Option<usize>,
    pub tfidf_pos: Option<Vec<String>>,
    pub polarity_lexicon: Option<PathBuf>,
    pub keep_pos: Option<Vec<String>>,
    pub min_node_freq: Option<u64>,
    pub min_edge_weight: Option<u64>,
    pub top_k_nodes: Option<usize>,
    pub format: Option<String>,
    pub derived: Option<bool>,
    pub mds_mode: Option<MdsMode>,
    pub metric: Option<String>,
    pub refine: Option<String>,
    pub max_iter: Option<usize>,
    pub eps: Option<f64>,
    pub top_lemmas: Option<usize>,
}

fn set<T>(slot: &mut T, value: &Option<T>)
where
    T: Clone,
{
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}

impl RunConfig {
    /// Parses TOML. Relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.resolve_paths(base_dir);
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus.root);
        if let Some(p) = self.tokenizer.lexicon.as_mut() {
            fix(p);
        }
        if let Some(p) = self.tokenizer.import.as_mut() {
            fix(p);
        }
        fix(&mut self.sentiment.lexicon);
        if let Some(p) = self.output_dir.as_mut() {
            fix(p);
        }
    }

    /// Applies command-line overrides; paths given there are taken as-is.
    pub fn apply(&mut self, o: &RunOverrides) {
        set_opt(&mut self.output_dir, &o.output_dir);
        set(&mut self.corpus.root, &o.corpus_root);
        set(&mut self.corpus.layout, &o.layout);
        set_opt(&mut self.corpus.delimiter_pattern, &o.delimiter_pattern);
        set_opt(&mut self.corpus.header_pattern, &o.header_pattern);
        set_opt(&mut self.corpus.source_label, &o.source_label);
        set(&mut self.tokenizer.mode, &o.tokenizer_mode);
        set_opt(&mut self.tokenizer.lexicon, &o.segmentation_lexicon);
        set_opt(&mut self.tokenizer.import, &o.import);
        set(&mut self.frequency.pos, &o.freq_pos);
        set(&mut self.frequency.top_n, &o.top_n);
        set(&mut self.tfidf.k, &o.k);
        set(&mut self.tfidf.pos, &o.tfidf_pos);
        set(&mut self.sentiment.lexicon, &o.polarity_lexicon);
        set(&mut self.network.keep_pos, &o.keep_pos);
        set(&mut self.network.min_node_freq, &o.min_node_freq);
        set(&mut self.network.min_edge_weight, &o.min_edge_weight);
        set_opt(&mut self.network.top_k_nodes, &o.top_k_nodes);
        set(&mut self.network.format, &o.format);
        set(&mut self.network.derived, &o.derived);
        set(&mut self.mds.mode, &o.mds_mode);
        set(&mut self.mds.metric, &o.metric);
        set(&mut self.mds.refine, &o.refine);
        set(&mut self.mds.max_iter, &o.max_iter);
        set(&mut self.mds.eps, &o.eps);
        set(&mut self.mds.top_lemmas, &o.top_lemmas);
    }

    /// Checks paths and parameter ranges and compiles patterns.
    pub fn validate(&self) -> Result<ValidatedConfig, ConfigError> {
        let exists = |field: &'static str, p: &Path| {
            if p.exists() {
                Ok(())
            } else {
                Err(ConfigError::MissingPath {
                    field,
                    path: p.to_path_buf(),
                })
            }
        };
        exists("corpus.root", &self.corpus.root)?;
        exists("sentiment.lexicon", &self.sentiment.lexicon)?;
        match self.tokenizer.mode {
            TokenizerMode::Lexicon => {
                let p = self
                    .tokenizer
                    .lexicon
                    .as_ref()
                    .ok_or_else(|| invalid("tokenizer.lexicon", "required in lexicon mode"))?;
                exists("tokenizer.lexicon", p)?;
            }
            TokenizerMode::Import => {
                let p = self
                    .tokenizer
                    .import
                    .as_ref()
                    .ok_or_else(|| invalid("tokenizer.import", "required in import mode"))?;
                exists("tokenizer.import", p)?;
            }
        }
        let compile = |field: &'static str, p: &str| {
            Regex::new(p).map_err(|e| invalid(field, e.to_string()))
        };
        let layout = match self.corpus.layout {
            LayoutKind::PerFile => Layout::PerFile,
            LayoutKind::SingleFile => {
                let p = self
                    .corpus
                    .delimiter_pattern
                    .as_deref()
                    .ok_or_else(|| invalid("corpus.delimiter_pattern", "required for single-file layout"))?;
                Layout::SingleFile {
                    delimiter: compile("corpus.delimiter_pattern", p)?,
                }
            }
        };
        let header = match &self.corpus.header_pattern {
            Some(p) => HeaderRule::Pattern(compile("corpus.header_pattern", p)?),
            None => HeaderRule::ChapterTitle {
                max_chars: DEFAULT_HEADER_MAX_CHARS,
            },
        };
        let positive = |field: &'static str, v: u64| {
            if v >= 1 {
                Ok(())
            } else {
                Err(invalid(field, "must be at least 1"))
            }
        };
        positive("frequency.top_n", self.frequency.top_n as u64)?;
        positive("tfidf.k", self.tfidf.k as u64)?;
        positive("network.min_node_freq", self.network.min_node_freq)?;
        positive("network.min_edge_weight", self.network.min_edge_weight)?;
        positive("mds.max_iter", self.mds.max_iter as u64)?;
        positive("mds.top_lemmas", self.mds.top_lemmas as u64)?;
        if !(self.mds.eps >= 0.0 && self.mds.eps.is_finite()) {
            return Err(invalid("mds.eps", "must be a finite non-negative number"));
        }
        if self.frequency.pos.is_empty() {
            return Err(invalid("frequency.pos", "must not be empty"));
        }
        if self.network.keep_pos.is_empty() {
            return Err(invalid("network.keep_pos", "must not be empty"));
        }
        let format: GraphFormat = self
            .network
            .format
            .parse()
            .map_err(|e: crate::network::NetworkError| invalid("network.format", e.to_string()))?;
        let metric: ChapterMetric = self.mds.metric.parse().map_err(|e: String| invalid("mds.metric", e))?;
        let refine = match self.mds.refine.as_str() {
            "smacof" => true,
            "none" => false,
            other => return Err(invalid("mds.refine", format!("expected smacof or none, got {other:?}"))),
        };
        let tfidf_vocabulary = if self.tfidf.pos.iter().any(|p| p == "*") {
            Vocabulary::All
        } else if self.tfidf.pos.is_empty() {
            return Err(invalid("tfidf.pos", "must not be empty"));
        } else {
            Vocabulary::Pos(pos_set(&self.tfidf.pos))
        };
        Ok(ValidatedConfig {
            config: self.clone(),
            load: LoadOptions {
                layout,
                header,
                source_label: self.corpus.source_label.clone(),
            },
            freq_pos: self.frequency.pos.iter().map(|p| Pos::from(p.as_str())).collect(),
            tfidf_vocabulary,
            keep_pos: pos_set(&self.network.keep_pos),
            format,
            metric,
            refine,
        })
    }
}

fn pos_set(tags: &[String]) -> BTreeSet<Pos> {
    tags.iter().map(|p| Pos::from(p.as_str())).collect()
}

/// A configuration that passed validation, with patterns compiled and
/// enumerations parsed.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub config: RunConfig,
    pub load: LoadOptions,
    pub freq_pos: Vec<Pos>,
    pub tfidf_vocabulary: Vocabulary,
    pub keep_pos: BTreeSet<Pos>,
    pub format: GraphFormat,
    pub metric: ChapterMetric,
    pub refine: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn fixture() -> (tempfile::TempDir, RunConfig) {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("corpus")).unwrap();
        fs::write(dir.path().join("seg.tsv"), "源氏\t名詞\t源氏\n").unwrap();
        fs::write(dir.path().join("pn.dic"), "美しい:うつくしい:形容詞:0.9\n").unwrap();
        let text = "[corpus]\nroot = \"corpus\"\n[tokenizer]\nlexicon = \"seg.tsv\"\n[sentiment]\nlexicon = \"pn.dic\"\n";
        let config = RunConfig::from_toml(text, dir.path()).unwrap();
        (dir, config)
    }

    #[test]
    fn defaults_and_path_resolution() {
        let (dir, config) = fixture();
        assert_eq!(config.corpus.root, dir.path().join("corpus"));
        assert_eq!(config.frequency.top_n, 30);
        assert_eq!(config.network.min_node_freq, 5);
        assert_eq!(config.mds.max_iter, 500);
        let v = config.validate().unwrap();
        assert!(v.refine);
        assert_eq!(v.format, GraphFormat::Dot);
    }

    #[test]
    fn missing_lexicon_fails_validation() {
        let (dir, mut config) = fixture();
        config.sentiment.lexicon = dir.path().join("absent.dic");
        assert!(matches!(
            config.validate(),
            Err(ConfigError::MissingPath {
                field: "sentiment.lexicon",
                ..
            })
        ));
    }

    #[test]
    fn ranges_are_checked() {
        let (_dir, mut config) = fixture();
        config.tfidf.k = 0;
        assert!(matches!(config.validate(), Err(ConfigError::Invalid { field: "tfidf.k", .. })));
        let (_dir, mut config) = fixture();
        config.network.format = "gexf".into();
        assert!(config.validate().is_err());
        let (_dir, mut config) = fixture();
        config.corpus.layout = LayoutKind::SingleFile;
        assert!(config.validate().is_err());
    }

    #[test]
    fn overrides_win() {
        let (_dir, mut config) = fixture();
        config.apply(&RunOverrides {
            k: Some(3),
            min_edge_weight: Some(1),
            format: Some("json".into()),
            ..RunOverrides::default()
        });
        assert_eq!(config.tfidf.k, 3);
        assert_eq!(config.network.min_edge_weight, 1);
        assert_eq!(config.validate().unwrap().format, GraphFormat::Json);
        assert_eq!(config.frequency.top_n, 30);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml(
            "[corpus]\nroot = \"c\"\nbogus = 1\n[tokenizer]\n[sentiment]\nlexicon = \"p\"\n",
            Path::new("."),
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }
}
