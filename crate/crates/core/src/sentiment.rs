//! Polarity-lexicon sentence scoring, the 80-bin score histogram and
//! per-chapter sentiment series.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::{Pos, Token, TokenizedCorpus};

/// Histogram bin width over [-1, +1].
pub const BIN_WIDTH: f64 = 0.025;
/// `2 / BIN_WIDTH`.
pub const BIN_COUNT: usize = 80;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("polarity lexicon has no valid records")]
    EmptyLexicon,
    #[error("no scored sentences")]
    NoScoredSentences,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// `(lemma, POS) -> score` plus a surface-only fallback table.
#[derive(Debug, Clone, Default)]
pub struct PolarityLexicon {
    entries: HashMap<(String, Pos), f64>,
    surface_fallback: HashMap<String, f64>,
    skipped: usize,
}

impl PolarityLexicon {
    /// Parses `surface:reading:POS:score` lines. Records with the wrong field
    /// count or a score that is not a number in [-1, +1] are skipped and
    /// counted. When a key repeats, the first record wins.
    pub fn parse(text: &str) -> Result<Self, SentimentError> {
        let mut lexicon = PolarityLexicon::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let line = if n == 0 { line.trim_start_matches('\u{feff}') } else { line };
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(':').collect();
            let parsed = match fields.as_slice() {
                [surface, _reading, pos, score] if !surface.is_empty() && !pos.is_empty() => {
                    score
                        .trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|s| (-1.0..=1.0).contains(s))
                        .map(|s| (*surface, *pos, s))
                }
                _ => None,
            };
            match parsed {
                Some((surface, pos, score)) => {
                    lexicon
                        .entries
                        .entry((surface.to_string(), Pos::from(pos)))
                        .or_insert(score);
                    lexicon
                        .surface_fallback
                        .entry(surface.to_string())
                        .or_insert(score);
                }
                None => lexicon.skipped += 1,
            }
        }
        if lexicon.entries.is_empty() {
            return Err(SentimentError::EmptyLexicon);
        }
        if lexicon.skipped > 0 {
            log::warn!("polarity lexicon: skipped {} malformed record(s)", lexicon.skipped);
        }
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let text = fs::read_to_string(path).map_err(|source| SentimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, lemma: &str, pos: &Pos) -> Option<f64> {
        self.entries.get(&(lemma.to_string(), pos.clone())).copied()
    }

    /// `(lemma, POS)` first, then the token's surface form.
    pub fn lookup(&self, token: &Token) -> Option<f64> {
        self.get(&token.lemma, &token.pos)
            .or_else(|| self.surface_fallback.get(&token.surface).copied())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Records dropped while parsing.
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
    Neutral,
    Unscored,
}

impl Label {
    pub fn of(score: Option<f64>) -> Label {
        match score {
            None => Label::Unscored,
            Some(s) if s > 0.0 => Label::Positive,
            Some(s) if s < 0.0 => Label::Negative,
            Some(_) => Label::Neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub chapter_index: u32,
    pub ordinal: usize,
    pub matched_count: usize,
    pub score: Option<f64>,
    pub label: Label,
}

/// Mean of the polarity values of matched tokens (zeros count). With no
/// match the sentence is unscored. The returned score has no sentence
/// reference set; see [`score_corpus`].
pub fn score_sentence(tokens: &[Token], lexicon: &PolarityLexicon) -> SentenceScore {
    let values: Vec<f64> = tokens.iter().filter_map(|t| lexicon.lookup(t)).collect();
    let score = if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    };
    SentenceScore {
        chapter_index: 0,
        ordinal: 0,
        matched_count: values.len(),
        score,
        label: Label::of(score),
    }
}

pub fn score_corpus(tokens: &TokenizedCorpus, lexicon: &PolarityLexicon) -> Vec<SentenceScore> {
    tokens
        .chapters
        .iter()
        .flat_map(|c| {
            c.sentences.iter().map(move |s| SentenceScore {
                chapter_index: c.index,
                ordinal: s.ordinal,
                ..score_sentence(&s.tokens, lexicon)
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl SentimentHistogram {
    /// Lower edge of bin `i`.
    pub fn lower_edge(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.bin_width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// `floor((score + 1) / 0.025)`, with +1 folded into the last bin.
pub fn bin_index(score: f64) -> usize {
    // 1 / 0.025 = 40 exactly; multiplying avoids the rounding of dividing by 0.025
    let raw = ((score + 1.0) * (BIN_COUNT as f64 / 2.0)).floor();
    (raw.max(0.0) as usize).min(BIN_COUNT - 1)
}

pub fn histogram(scores: &[SentenceScore]) -> SentimentHistogram {
    let mut counts = vec![0u64; BIN_COUNT];
    for s in scores.iter().filter_map(|s| s.score) {
        counts[bin_index(s)] += 1;
    }
    SentimentHistogram {
        bin_width: BIN_WIDTH,
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub chapter_index: u32,
    pub mean: f64,
    pub scored: usize,
    /// Set when the chapter had no scored sentence; `mean` is then 0.
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChapterSeries {
    pub rows: Vec<SeriesRow>,
}

/// Mean sentence score per chapter. `chapters` lists every chapter index to
/// report, so chapters without scores still get a (flagged) row.
pub fn chapter_series(chapters: &[u32], scores: &[SentenceScore]) -> ChapterSeries {
    let mut sums: HashMap<u32, (f64, usize)> = HashMap::new();
    for s in scores {
        if let Some(v) = s.score {
            let e = sums.entry(s.chapter_index).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    ChapterSeries {
        rows: chapters
            .iter()
            .map(|&chapter_index| match sums.get(&chapter_index) {
                Some(&(sum, n)) => SeriesRow {
                    chapter_index,
                    mean: sum / n as f64,
                    scored: n,
                    empty: false,
                },
                None => SeriesRow {
                    chapter_index,
                    mean: 0.0,
                    scored: 0,
                    empty: true,
                },
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarityFractions {
    pub scored: usize,
    pub negative: f64,
    pub positive: f64,
    pub neutral: f64,
}

pub fn polarity_fractions(scores: &[SentenceScore]) -> Result<PolarityFractions, SentimentError> {
    let (mut neg, mut pos, mut neu) = (0usize, 0usize, 0usize);
    for s in scores {
        match s.label {
            Label::Negative => neg += 1,
            Label::Positive => pos += 1,
            Label::Neutral => neu += 1,
            Label::Unscored => {}
        }
    }
    let scored = neg + pos + neu;
    if scored == 0 {
        return Err(SentimentError::NoScoredSentences);
    }
    let n = scored as f64;
    Ok(PolarityFractions {
        scored,
        negative: neg as f64 / n,
        positive: pos as f64 / n,
        neutral: neu as f64 / n,
    })
}

/// Share of scored sentences whose score is strictly negative.
pub fn negativity_fraction(scores: &[SentenceScore]) -> Result<f64, SentimentError> {
    polarity_fractions(scores).map(|f| f.negative)
}

/// Token-level counts of lexicon matches by sign.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordPolarityCounts {
    pub positive: u64,
    pub negative: u64,
    pub neutral: u64,
}

impl WordPolarityCounts {
    pub fn negative_share(&self) -> Option<f64> {
        let total = self.positive + self.negative + self.neutral;
        (total > 0).then(|| self.negative as f64 / total as f64)
    }
}

pub fn word_polarity_counts(tokens: &TokenizedCorpus, lexicon: &PolarityLexicon) -> WordPolarityCounts {
    let mut counts = WordPolarityCounts::default();
    for v in tokens.tokens().filter_map(|t| lexicon.lookup(t)) {
        if v > 0.0 {
            counts.positive += 1;
        } else if v < 0.0 {
            counts.negative += 1;
        } else {
            counts.neutral += 1;
        }
    }
    counts
}
