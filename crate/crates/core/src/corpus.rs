//! Chaptered corpus ingestion and sentence segmentation.
//!
//! A corpus is read either from a directory holding one UTF-8 file per
//! chapter (`01_kiritsubo.txt`, `02_hahakigi.txt`, ...) or from a single file
//! whose chapters are introduced by delimiter lines. Chapter bodies are split
//! into sentences on the Japanese sentence-final marks `。！？`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentence-final characters.
pub const TERMINATORS: [char; 3] = ['。', '！', '？'];

/// Closing brackets that stay attached to the sentence they close.
const CLOSERS: [char; 8] = ['」', '』', '）', ')', '】', '〉', '》', '〕'];

/// Titles longer than this are never treated as header lines by the default rule.
pub const DEFAULT_HEADER_MAX_CHARS: usize = 20;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no chapters found under {0}")]
    EmptyCorpus(PathBuf),
    #[error("{path} is not valid UTF-8 (byte offset {offset})")]
    EncodingError { path: PathBuf, offset: usize },
    #[error("chapter index {index} used by both {first} and {second}")]
    DuplicateChapterIndex {
        index: u32,
        first: String,
        second: String,
    },
    #[error("expected exactly one .txt file for single-file layout under {0}, found {1}")]
    AmbiguousSource(PathBuf, usize),
    #[error("invalid corpus manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("invalid corpus: {0}")]
    Invalid(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub chapter_index: u32,
    pub ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chapter {
    pub index: u32,
    pub title: String,
    /// Chapter body after header removal; sentences are carved out of this.
    pub raw_text: String,
    pub sentences: Vec<Sentence>,
}

impl Chapter {
    /// Builds a chapter by segmenting `raw_text`.
    pub fn new(index: u32, title: impl Into<String>, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let sentences = split_sentences(&raw_text)
            .into_iter()
            .enumerate()
            .map(|(ordinal, text)| Sentence {
                text,
                chapter_index: index,
                ordinal,
            })
            .collect();
        Chapter {
            index,
            title: title.into(),
            raw_text,
            sentences,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub source_label: String,
    pub chapters: Vec<Chapter>,
}

impl Corpus {
    /// Checks the structural invariants: non-empty, indices `1..=n` in order,
    /// sentence back-references consistent.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.chapters.is_empty() {
            return Err(CorpusError::Invalid("corpus has no chapters".into()));
        }
        for (pos, chapter) in self.chapters.iter().enumerate() {
            let expected = pos as u32 + 1;
            if chapter.index != expected {
                return Err(CorpusError::Invalid(format!(
                    "chapter at position {pos} has index {}, expected {expected}",
                    chapter.index
                )));
            }
            for (ordinal, s) in chapter.sentences.iter().enumerate() {
                if s.chapter_index != chapter.index || s.ordinal != ordinal {
                    return Err(CorpusError::Invalid(format!(
                        "sentence {ordinal} of chapter {} is mislabeled",
                        chapter.index
                    )));
                }
                if s.text.trim().is_empty() {
                    return Err(CorpusError::Invalid(format!(
                        "sentence {ordinal} of chapter {} is blank",
                        chapter.index
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.chapters.iter().flat_map(|c| c.sentences.iter())
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let corpus: Corpus =
            serde_json::from_str(text).map_err(|e| CorpusError::Invalid(e.to_string()))?;
        corpus.validate()?;
        Ok(corpus)
    }

    /// Canonical JSON: field order follows the struct declarations.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("corpus serialization cannot fail")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub chapter_count: usize,
    pub sentence_count: usize,
    pub byte_size: usize,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    CorpusStats {
        chapter_count: corpus.chapters.len(),
        sentence_count: corpus.chapters.iter().map(|c| c.sentences.len()).sum(),
        byte_size: corpus.chapters.iter().map(|c| c.raw_text.len()).sum(),
    }
}

/// Splits text into sentences.
///
/// Each of `。！？` ends a sentence. A run of terminators (`！？`) and any
/// closing brackets directly after the terminator (`。」`) stay with the
/// sentence they end. Line breaks are formatting and are removed. A trailing
/// fragment without a terminator is a sentence of its own; fragments that are
/// only whitespace are dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut closing = false;

    for ch in text.chars() {
        if ch == '\n' || ch == '\r' {
            continue;
        }
        if closing {
            if TERMINATORS.contains(&ch) || CLOSERS.contains(&ch) {
                current.push(ch);
                continue;
            }
            flush(&mut current, &mut out);
            closing = false;
        }
        current.push(ch);
        if TERMINATORS.contains(&ch) {
            closing = true;
        }
    }
    flush(&mut current, &mut out);
    out
}

fn flush(current: &mut String, out: &mut Vec<String>) {
    if !current.trim().is_empty() {
        out.push(std::mem::take(current));
    } else {
        current.clear();
    }
}

/// How header/title lines are recognised and dropped before segmentation.
#[derive(Debug, Clone)]
pub enum HeaderRule {
    /// Drop lines that, trimmed, equal the chapter title and are shorter than `max_chars`.
    ChapterTitle { max_chars: usize },
    /// Drop every line matching the pattern.
    Pattern(Regex),
    Keep,
}

impl Default for HeaderRule {
    fn default() -> Self {
        HeaderRule::ChapterTitle {
            max_chars: DEFAULT_HEADER_MAX_CHARS,
        }
    }
}

impl HeaderRule {
    fn strip(&self, text: &str, title: &str) -> String {
        let drop = |line: &str| -> bool {
            let trimmed = line.trim();
            match self {
                HeaderRule::ChapterTitle { max_chars } => {
                    !title.is_empty()
                        && trimmed == title
                        && trimmed.chars().count() < *max_chars
                }
                HeaderRule::Pattern(re) => re.is_match(trimmed),
                HeaderRule::Keep => false,
            }
        };
        let mut out = String::with_capacity(text.len());
        for line in text.split_inclusive('\n') {
            if !drop(line) {
                out.push_str(line);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum Layout {
    /// One file per chapter; the numeric filename prefix fixes the order.
    /// A `manifest.toml` or `manifest.json` in the root overrides discovery.
    PerFile,
    /// One file; each line matching `delimiter` opens a chapter. A capture
    /// group named `title` (or else group 1) supplies the title.
    SingleFile { delimiter: Regex },
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub layout: Layout,
    pub header: HeaderRule,
    pub source_label: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            layout: Layout::PerFile,
            header: HeaderRule::default(),
            source_label: None,
        }
    }
}

/// Manifest mapping chapter index to file and title.
#[derive(Debug, Clone, Deserialize)]
pub struct CorpusManifest {
    #[serde(default)]
    pub source_label: Option<String>,
    pub chapters: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ManifestEntry {
    pub index: u32,
    pub file: PathBuf,
    pub title: String,
}

pub fn load_corpus(root: &Path, options: &LoadOptions) -> Result<Corpus, CorpusError> {
    let label = options
        .source_label
        .clone()
        .unwrap_or_else(|| root.display().to_string());
    let raw = match &options.layout {
        Layout::PerFile => {
            if let Some(manifest) = find_manifest(root) {
                read_manifest_chapters(root, &manifest)?
            } else {
                read_per_file(root)?
            }
        }
        Layout::SingleFile { delimiter } => read_single_file(root, delimiter)?,
    };
    if raw.is_empty() {
        return Err(CorpusError::EmptyCorpus(root.to_path_buf()));
    }
    let chapters = raw
        .into_iter()
        .enumerate()
        .map(|(pos, (title, text))| {
            let body = options.header.strip(&text, &title);
            Chapter::new(pos as u32 + 1, title, body)
        })
        .collect();
    Ok(Corpus {
        source_label: label,
        chapters,
    })
}

fn read_utf8(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let text = String::from_utf8(bytes).map_err(|e| CorpusError::EncodingError {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    Ok(text.strip_prefix('\u{feff}').map(str::to_owned).unwrap_or(text))
}

fn find_manifest(root: &Path) -> Option<PathBuf> {
    ["manifest.toml", "manifest.json"]
        .iter()
        .map(|name| root.join(name))
        .find(|p| p.is_file())
}

fn read_manifest_chapters(
    root: &Path,
    path: &Path,
) -> Result<Vec<(String, String)>, CorpusError> {
    let text = read_utf8(path)?;
    let bad = |reason: String| CorpusError::Manifest {
        path: path.to_path_buf(),
        reason,
    };
    let manifest: CorpusManifest = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    } else {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))?
    };
    let mut by_index: BTreeMap<u32, ManifestEntry> = BTreeMap::new();
    for entry in manifest.chapters {
        if let Some(prev) = by_index.get(&entry.index) {
            return Err(CorpusError::DuplicateChapterIndex {
                index: entry.index,
                first: prev.file.display().to_string(),
                second: entry.file.display().to_string(),
            });
        }
        by_index.insert(entry.index, entry);
    }
    by_index
        .into_values()
        .map(|entry| Ok((entry.title, read_utf8(&root.join(&entry.file))?)))
        .collect()
}

fn read_per_file(root: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let prefix = Regex::new(r"^(\d+)[\s_\-.]*(.*)$").expect("static regex");
    let mut found: Vec<(u32, String, PathBuf)> = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let path = entry.map_err(io_err(root))?.path();
        if !path.is_file() || path.extension().is_none_or(|e| e != "txt") {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let Some(caps) = prefix.captures(stem) else {
            continue;
        };
        let Ok(index) = caps[1].parse::<u32>() else {
            continue;
        };
        found.push((index, caps[2].to_string(), path));
    }
    found.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.2.cmp(&b.2)));
    for pair in found.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(CorpusError::DuplicateChapterIndex {
                index: pair[0].0,
                first: pair[0].2.display().to_string(),
                second: pair[1].2.display().to_string(),
            });
        }
    }
    found
        .into_iter()
        .map(|(_, title, path)| Ok((title, read_utf8(&path)?)))
        .collect()
}

fn read_single_file(root: &Path, delimiter: &Regex) -> Result<Vec<(String, String)>, CorpusError> {
    let file = if root.is_file() {
        root.to_path_buf()
    } else {
        let mut txts: Vec<PathBuf> = fs::read_dir(root)
            .map_err(io_err(root))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
            .collect();
        if txts.len() != 1 {
            return Err(CorpusError::AmbiguousSource(root.to_path_buf(), txts.len()));
        }
        txts.remove(0)
    };
    let text = read_utf8(&file)?;
    let mut chapters: Vec<(String, String)> = Vec::new();
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if let Some(caps) = delimiter.captures(trimmed) {
            let title = caps
                .name("title")
                .or_else(|| caps.get(1))
                .map(|m| m.as_str())
                .unwrap_or(trimmed)
                .trim()
                .to_string();
            chapters.push((title, String::new()));
        } else if let Some((_, body)) = chapters.last_mut() {
            body.push_str(line);
        }
        // text before the first delimiter is preamble and is not part of any chapter
    }
    Ok(chapters)
}
