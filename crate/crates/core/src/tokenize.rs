//! Morpheme tokens: a greedy longest-match segmenter and an importer for
//! analyzer output in the tab/comma interchange format.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

#[derive(Debug, Error)]
pub enum TokenizeError {
    #[error("segmentation lexicon is empty")]
    EmptyLexicon,
    #[error("lexicon line {line}: {reason}")]
    MalformedLexiconLine { line: usize, reason: String },
    #[error("token stream line {line}: malformed record {text:?}")]
    MalformedRecord { line: usize, text: String },
    #[error("token stream line {line}: part of speech {pos:?} is not in the tag set")]
    UnknownPos { line: usize, pos: String },
    #[error("alignment: {0}")]
    AlignmentError(String),
    #[error("invalid tokenized corpus: {0}")]
    Invalid(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse part-of-speech tag (the first feature field of an analyzer record).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pos(String);

impl Pos {
    pub const NOUN: &'static str = "名詞";
    pub const VERB: &'static str = "動詞";
    pub const ADJECTIVE: &'static str = "形容詞";
    pub const PARTICLE: &'static str = "助詞";
    pub const AUXILIARY: &'static str = "助動詞";
    pub const SYMBOL: &'static str = "記号";
    pub const UNKNOWN: &'static str = "未知語";

    pub fn new(tag: impl Into<String>) -> Self {
        Pos(tag.into())
    }

    pub fn unknown() -> Self {
        Pos(Self::UNKNOWN.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Pos {
    fn from(s: &str) -> Self {
        Pos(s.to_string())
    }
}

/// The closed set of coarse tags tokens may carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet(BTreeSet<Pos>);

impl TagSet {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(tags: I) -> Self {
        let mut set: BTreeSet<Pos> = tags.into_iter().map(|t| Pos(t.into())).collect();
        set.insert(Pos::unknown());
        TagSet(set)
    }

    pub fn contains(&self, pos: &Pos) -> bool {
        self.0.contains(pos)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pos> {
        self.0.iter()
    }
}

impl Default for TagSet {
    /// IPADIC and UniDic top-level categories.
    fn default() -> Self {
        TagSet::new([
            "名詞", "代名詞", "動詞", "形容詞", "形状詞", "副詞", "連体詞", "接続詞", "感動詞",
            "助詞", "助動詞", "接頭詞", "接頭辞", "接尾辞", "記号", "補助記号", "空白", "フィラー",
            "その他", "未知語",
        ])
    }
}

/// The default content-word families.
pub fn content_pos() -> BTreeSet<Pos> {
    [Pos::NOUN, Pos::VERB, Pos::ADJECTIVE]
        .into_iter()
        .map(Pos::from)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub pos: Pos,
    pub lemma: String,
    /// Fine-grained feature fields as given by the analyzer; carried, not interpreted.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: impl Into<Pos>, lemma: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            pos: pos.into(),
            lemma: lemma.into(),
            detail: String::new(),
        }
    }

    fn unknown(ch: &str) -> Self {
        Token::new(ch, Pos::unknown(), ch)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SegmentationLexicon {
    entries: HashMap<String, (Pos, String)>,
    max_chars: usize,
}

impl SegmentationLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces an entry. Empty surfaces are ignored; an empty lemma means "same as surface".
    pub fn insert(&mut self, surface: &str, pos: impl Into<Pos>, lemma: &str) {
        if surface.is_empty() {
            return;
        }
        let lemma = if lemma.is_empty() { surface } else { lemma };
        self.max_chars = self.max_chars.max(surface.chars().count());
        self.entries
            .insert(surface.to_string(), (pos.into(), lemma.to_string()));
    }

    pub fn get(&self, surface: &str) -> Option<&(Pos, String)> {
        self.entries.get(surface)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest entry length in characters.
    pub fn max_chars(&self) -> usize {
        self.max_chars
    }

    /// Parses `surface<TAB>pos<TAB>lemma` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str) -> Result<Self, TokenizeError> {
        let mut lexicon = SegmentationLexicon::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let line = if n == 0 { line.trim_start_matches('\u{feff}') } else { line };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(TokenizeError::MalformedLexiconLine {
                    line: n + 1,
                    reason: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            }
            if fields[0].is_empty() || fields[1].is_empty() {
                return Err(TokenizeError::MalformedLexiconLine {
                    line: n + 1,
                    reason: "empty surface or part of speech".into(),
                });
            }
            lexicon.insert(fields[0], fields[1], fields.get(2).copied().unwrap_or(""));
        }
        if lexicon.is_empty() {
            return Err(TokenizeError::EmptyLexicon);
        }
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self, TokenizeError> {
        let text = fs::read_to_string(path).map_err(|source| TokenizeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_tsv(&text)
    }
}

/// Greedy left-to-right longest match. Characters no entry covers become
/// one-character `未知語` tokens, so the surfaces always concatenate back to
/// the input.
pub fn tokenize_longest_match(sentence: &str, lexicon: &SegmentationLexicon) -> Vec<Token> {
    // byte offsets of every char boundary, including the end
    let bounds: Vec<usize> = sentence
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(sentence.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    let mut tokens = Vec::new();
    let mut at = 0;
    while at < n_chars {
        let longest = (1..=lexicon.max_chars().min(n_chars - at))
            .rev()
            .find_map(|len| {
                let piece = &sentence[bounds[at]..bounds[at + len]];
                lexicon.get(piece).map(|entry| (len, piece, entry))
            });
        match longest {
            Some((len, piece, (pos, lemma))) => {
                tokens.push(Token::new(piece, pos.clone(), lemma.as_str()));
                at += len;
            }
            None => {
                tokens.push(Token::unknown(&sentence[bounds[at]..bounds[at + 1]]));
                at += 1;
            }
        }
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedSentence {
    pub ordinal: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedChapter {
    pub index: u32,
    pub title: String,
    pub sentences: Vec<TokenizedSentence>,
}

/// Token lists for every sentence, keyed by (chapter index, ordinal). Carries
/// the chapter skeleton of its corpus so downstream stages need nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedCorpus {
    pub source_label: String,
    pub chapters: Vec<TokenizedChapter>,
}

impl TokenizedCorpus {
    pub fn sentence_count(&self) -> usize {
        self.chapters.iter().map(|c| c.sentences.len()).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.chapters
            .iter()
            .flat_map(|c| c.sentences.iter())
            .flat_map(|s| s.tokens.iter())
    }

    pub fn validate(&self) -> Result<(), TokenizeError> {
        for (pos, chapter) in self.chapters.iter().enumerate() {
            if chapter.index != pos as u32 + 1 {
                return Err(TokenizeError::Invalid(format!(
                    "chapter at position {pos} has index {}",
                    chapter.index
                )));
            }
            for (ordinal, s) in chapter.sentences.iter().enumerate() {
                if s.ordinal != ordinal {
                    return Err(TokenizeError::Invalid(format!(
                        "chapter {} sentence {ordinal} has ordinal {}",
                        chapter.index, s.ordinal
                    )));
                }
                if s.tokens.iter().any(|t| t.surface.is_empty()) {
                    return Err(TokenizeError::Invalid(format!(
                        "chapter {} sentence {ordinal} has an empty token",
                        chapter.index
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, TokenizeError> {
        let tokens: TokenizedCorpus =
            serde_json::from_str(text).map_err(|e| TokenizeError::Invalid(e.to_string()))?;
        tokens.validate()?;
        Ok(tokens)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("token serialization cannot fail")
    }
}

/// Segments every sentence of the corpus with the lexicon. Sentences are
/// processed in parallel; output order is that of the corpus.
pub fn tokenize_corpus(
    corpus: &Corpus,
    lexicon: &SegmentationLexicon,
) -> Result<TokenizedCorpus, TokenizeError> {
    if lexicon.is_empty() {
        return Err(TokenizeError::EmptyLexicon);
    }
    let chapters = corpus
        .chapters
        .iter()
        .map(|chapter| TokenizedChapter {
            index: chapter.index,
            title: chapter.title.clone(),
            sentences: chapter
                .sentences
                .par_iter()
                .map(|s| TokenizedSentence {
                    ordinal: s.ordinal,
                    text: s.text.clone(),
                    tokens: tokenize_longest_match(&s.text, lexicon),
                })
                .collect(),
        })
        .collect();
    Ok(TokenizedCorpus {
        source_label: corpus.source_label.clone(),
        chapters,
    })
}

/// Parses one `surface<TAB>features` record.
pub fn parse_record(line: &str, line_no: usize, tags: &TagSet) -> Result<Token, TokenizeError> {
    let malformed = || TokenizeError::MalformedRecord {
        line: line_no,
        text: line.to_string(),
    };
    let (surface, features) = line.split_once('\t').ok_or_else(malformed)?;
    if surface.is_empty() {
        return Err(malformed());
    }
    let fields: Vec<&str> = features.split(',').collect();
    let coarse = fields[0].trim();
    if coarse.is_empty() {
        return Err(malformed());
    }
    let pos = Pos::new(coarse);
    if !tags.contains(&pos) {
        return Err(TokenizeError::UnknownPos {
            line: line_no,
            pos: coarse.to_string(),
        });
    }
    let lemma = match fields.get(6) {
        Some(l) if !l.is_empty() && *l != "*" => l.to_string(),
        _ => surface.to_string(),
    };
    let detail = fields.get(1..6.min(fields.len())).map(|f| f.join(",")).unwrap_or_default();
    Ok(Token {
        surface: surface.to_string(),
        pos,
        lemma,
        detail,
    })
}

fn parse_chapter_marker(line: &str) -> Option<Result<u32, ()>> {
    let rest = line.strip_prefix("#CHAPTER")?;
    Some(rest.trim().parse::<u32>().map_err(|_| ()))
}

/// Reads interchange-format token text and aligns it with the corpus.
///
/// Without `#CHAPTER <n>` markers the stream's sentences are matched to the
/// corpus sentences by order and the counts must agree. With markers, each
/// chapter takes the stream's own segmentation and sentence text is rebuilt
/// from the token surfaces.
pub fn import_tokens(
    stream: &str,
    corpus: &Corpus,
    tags: &TagSet,
) -> Result<TokenizedCorpus, TokenizeError> {
    // (chapter marker, sentences)
    let mut groups: Vec<(Option<u32>, Vec<Vec<Token>>)> = vec![(None, Vec::new())];
    let mut current: Vec<Token> = Vec::new();
    let mut pending = false;

    for (n, raw) in stream.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        let line = if n == 0 { line.trim_start_matches('\u{feff}') } else { line };
        if line.is_empty() {
            continue;
        }
        if line == "EOS" {
            let group = groups.last_mut().expect("non-empty");
            group.1.push(std::mem::take(&mut current));
            pending = false;
            continue;
        }
        if line.starts_with('#') && !line.contains('\t') {
            if let Some(marker) = parse_chapter_marker(line) {
                let index = marker.map_err(|_| TokenizeError::MalformedRecord {
                    line: line_no,
                    text: line.to_string(),
                })?;
                if pending {
                    groups.last_mut().expect("non-empty").1.push(std::mem::take(&mut current));
                    pending = false;
                }
                groups.push((Some(index), Vec::new()));
            }
            continue;
        }
        current.push(parse_record(line, line_no, tags)?);
        pending = true;
    }
    if pending {
        groups.last_mut().expect("non-empty").1.push(current);
    }

    let has_markers = groups.len() > 1;
    if has_markers {
        if !groups[0].1.is_empty() {
            return Err(TokenizeError::AlignmentError(
                "sentences precede the first #CHAPTER marker".into(),
            ));
        }
        align_by_markers(groups.split_off(1), corpus)
    } else {
        align_by_order(groups.pop().expect("one group").1, corpus)
    }
}

fn align_by_order(
    sentences: Vec<Vec<Token>>,
    corpus: &Corpus,
) -> Result<TokenizedCorpus, TokenizeError> {
    let expected: usize = corpus.chapters.iter().map(|c| c.sentences.len()).sum();
    if sentences.len() != expected {
        return Err(TokenizeError::AlignmentError(format!(
            "stream has {} sentences, corpus has {expected}",
            sentences.len()
        )));
    }
    let mut stream = sentences.into_iter();
    let chapters = corpus
        .chapters
        .iter()
        .map(|chapter| TokenizedChapter {
            index: chapter.index,
            title: chapter.title.clone(),
            sentences: chapter
                .sentences
                .iter()
                .map(|s| TokenizedSentence {
                    ordinal: s.ordinal,
                    text: s.text.clone(),
                    tokens: stream.next().expect("counts checked"),
                })
                .collect(),
        })
        .collect();
    Ok(TokenizedCorpus {
        source_label: corpus.source_label.clone(),
        chapters,
    })
}

fn align_by_markers(
    groups: Vec<(Option<u32>, Vec<Vec<Token>>)>,
    corpus: &Corpus,
) -> Result<TokenizedCorpus, TokenizeError> {
    let mut per_chapter: HashMap<u32, Vec<Vec<Token>>> = HashMap::new();
    for (marker, sentences) in groups {
        let index = marker.expect("marker groups");
        if !corpus.chapters.iter().any(|c| c.index == index) {
            return Err(TokenizeError::AlignmentError(format!(
                "#CHAPTER {index} does not exist in the corpus"
            )));
        }
        if per_chapter.insert(index, sentences).is_some() {
            return Err(TokenizeError::AlignmentError(format!(
                "#CHAPTER {index} appears more than once"
            )));
        }
    }
    let chapters = corpus
        .chapters
        .iter()
        .map(|chapter| TokenizedChapter {
            index: chapter.index,
            title: chapter.title.clone(),
            sentences: per_chapter
                .remove(&chapter.index)
                .unwrap_or_default()
                .into_iter()
                .enumerate()
                .map(|(ordinal, tokens)| TokenizedSentence {
                    ordinal,
                    text: tokens.iter().map(|t| t.surface.as_str()).collect(),
                    tokens,
                })
                .collect(),
        })
        .collect();
    Ok(TokenizedCorpus {
        source_label: corpus.source_label.clone(),
        chapters,
    })
}

/// Removes tokens whose tag is not in `keep`. Sentences are kept even when emptied.
pub fn filter_pos(tokens: &TokenizedCorpus, keep: &BTreeSet<Pos>) -> TokenizedCorpus {
    TokenizedCorpus {
        source_label: tokens.source_label.clone(),
        chapters: tokens
            .chapters
            .iter()
            .map(|c| TokenizedChapter {
                index: c.index,
                title: c.title.clone(),
                sentences: c
                    .sentences
                    .iter()
                    .map(|s| TokenizedSentence {
                        ordinal: s.ordinal,
                        text: s.text.clone(),
                        tokens: s
                            .tokens
                            .iter()
                            .filter(|t| keep.contains(&t.pos))
                            .cloned()
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Chapter;
    use proptest::prelude::*;

    fn lexicon(words: &[&str]) -> SegmentationLexicon {
        let mut lex = SegmentationLexicon::new();
        for w in words {
            lex.insert(w, Pos::NOUN, w);
        }
        lex
    }

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn prefers_longest_entry() {
        let lex = lexicon(&["源氏", "物語", "源氏物語"]);
        assert_eq!(surfaces(&tokenize_longest_match("源氏物語", &lex)), ["源氏物語"]);
    }

    #[test]
    fn greedy_scan_trace() {
        let lex = lexicon(&["東", "京", "東京"]);
        assert_eq!(surfaces(&tokenize_longest_match("東京東", &lex)), ["東京", "東"]);
    }

    #[test]
    fn unknown_characters_fall_back() {
        let lex = lexicon(&["a"]);
        let tokens = tokenize_longest_match("axa", &lex);
        assert_eq!(surfaces(&tokens), ["a", "x", "a"]);
        assert_eq!(tokens[1].pos.as_str(), Pos::UNKNOWN);
        assert_eq!(tokens[1].lemma, "x");
        assert_eq!(tokens[0].pos.as_str(), Pos::NOUN);
    }

    #[test]
    fn lexicon_tsv_maps_inflections_to_lemma() {
        let lex = SegmentationLexicon::from_tsv("思っ\t動詞\t思う\n美しい\t形容詞\t美しい\n").unwrap();
        let tokens = tokenize_longest_match("思っ", &lex);
        assert_eq!(tokens[0].lemma, "思う");
        assert_eq!(tokens[0].pos.as_str(), "動詞");
    }

    #[test]
    fn lexicon_tsv_errors() {
        assert!(matches!(
            SegmentationLexicon::from_tsv("# only a comment\n"),
            Err(TokenizeError::EmptyLexicon)
        ));
        assert!(matches!(
            SegmentationLexicon::from_tsv("a\n"),
            Err(TokenizeError::MalformedLexiconLine { line: 1, .. })
        ));
    }

    #[test]
    fn record_parsing() {
        let tags = TagSet::default();
        let t = parse_record("源氏\t名詞,固有名詞,人名,一般,*,*,源氏,ゲンジ,ゲンジ", 1, &tags).unwrap();
        assert_eq!(t.surface, "源氏");
        assert_eq!(t.pos.as_str(), "名詞");
        assert_eq!(t.lemma, "源氏");
        let t = parse_record(
            "思っ\t動詞,自立,*,*,五段・ワ行促音便,基本形,思う,オモウ,オモウ",
            1,
            &tags,
        )
        .unwrap();
        assert_eq!(t.lemma, "思う");
        let t = parse_record("ぬえ\t名詞,一般,*,*,*,*,*", 1, &tags).unwrap();
        assert_eq!(t.lemma, "ぬえ");
        let t = parse_record("ぬえ\t名詞", 1, &tags).unwrap();
        assert_eq!(t.lemma, "ぬえ");
    }

    #[test]
    fn record_errors() {
        let tags = TagSet::default();
        assert!(matches!(
            parse_record("no tab here", 4, &tags),
            Err(TokenizeError::MalformedRecord { line: 4, .. })
        ));
        assert!(matches!(
            parse_record("x\t謎品詞,*", 2, &tags),
            Err(TokenizeError::UnknownPos { line: 2, .. })
        ));
    }

    fn two_chapter_corpus() -> Corpus {
        Corpus {
            source_label: "t".into(),
            chapters: vec![
                Chapter::new(1, "a", "源氏は思う。"),
                Chapter::new(2, "b", "美しい。"),
            ],
        }
    }

    const STREAM: &str = "源氏\t名詞,固有名詞,人名,一般,*,*,源氏,ゲンジ,ゲンジ\n\
        は\t助詞,係助詞,*,*,*,*,は,ハ,ワ\n\
        思う\t動詞,自立,*,*,五段・ワ行促音便,基本形,思う,オモウ,オモウ\n\
        。\t記号,句点,*,*,*,*,。,。,。\n\
        EOS\n\
        美しい\t形容詞,自立,*,*,形容詞・イ段,基本形,美しい,ウツクシイ,ウツクシイ\n\
        。\t記号,句点,*,*,*,*,。,。,。\n\
        EOS\n";

    #[test]
    fn import_aligns_by_order() {
        let corpus = two_chapter_corpus();
        let tokens = import_tokens(STREAM, &corpus, &TagSet::default()).unwrap();
        assert_eq!(tokens.sentence_count(), 2);
        assert_eq!(tokens.chapters[0].sentences[0].tokens.len(), 4);
        assert_eq!(tokens.chapters[1].sentences[0].text, "美しい。");
        tokens.validate().unwrap();
    }

    #[test]
    fn eos_closes_sentence_without_token() {
        let corpus = Corpus {
            source_label: "t".into(),
            chapters: vec![Chapter::new(1, "a", "一。二。")],
        };
        let tokens = import_tokens("EOS\nEOS\n", &corpus, &TagSet::default()).unwrap();
        assert_eq!(tokens.sentence_count(), 2);
        assert_eq!(tokens.tokens().count(), 0);
    }

    #[test]
    fn import_count_mismatch() {
        let corpus = two_chapter_corpus();
        let err = import_tokens("源氏\t名詞\nEOS\n", &corpus, &TagSet::default()).unwrap_err();
        assert!(matches!(err, TokenizeError::AlignmentError(_)));
    }

    #[test]
    fn import_with_chapter_markers() {
        let corpus = two_chapter_corpus();
        let stream = "#CHAPTER 2\n美しい\t形容詞\nEOS\n悲しい\t形容詞\n#CHAPTER 1\n源氏\t名詞\nEOS\n";
        let tokens = import_tokens(stream, &corpus, &TagSet::default()).unwrap();
        assert_eq!(tokens.chapters[0].sentences.len(), 1);
        assert_eq!(tokens.chapters[1].sentences.len(), 2);
        assert_eq!(tokens.chapters[1].sentences[1].text, "悲しい");
        let err = import_tokens("源氏\t名詞\nEOS\n#CHAPTER 1\n", &corpus, &TagSet::default())
            .unwrap_err();
        assert!(matches!(err, TokenizeError::AlignmentError(_)));
        let err = import_tokens("#CHAPTER 9\n", &corpus, &TagSet::default()).unwrap_err();
        assert!(matches!(err, TokenizeError::AlignmentError(_)));
    }

    #[test]
    fn filter_keeps_sentence_shape() {
        let corpus = two_chapter_corpus();
        let tokens = import_tokens(STREAM, &corpus, &TagSet::default()).unwrap();
        let nouns = filter_pos(&tokens, &[Pos::from("名詞")].into_iter().collect());
        assert_eq!(surfaces(&nouns.chapters[0].sentences[0].tokens), ["源氏"]);
        assert!(nouns.chapters[1].sentences[0].tokens.is_empty());
        assert_eq!(nouns.sentence_count(), tokens.sentence_count());
        let all: BTreeSet<Pos> = TagSet::default().iter().cloned().collect();
        assert_eq!(filter_pos(&tokens, &all), tokens);
    }

    proptest! {
        #[test]
        fn surfaces_concatenate_to_input(
            words in proptest::collection::vec("[あいう]{1,3}", 1..6),
            text in "[あいうx]{0,20}",
        ) {
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let lex = lexicon(&refs);
            let tokens = tokenize_longest_match(&text, &lex);
            let joined: String = tokens.iter().map(|t| t.surface.as_str()).collect();
            prop_assert_eq!(joined, text);
        }

        #[test]
        fn filter_is_idempotent_and_intersects(a in proptest::sample::subsequence(vec!["名詞", "動詞", "助詞", "記号"], 0..4),
                                               b in proptest::sample::subsequence(vec!["名詞", "動詞", "助詞", "記号"], 0..4)) {
            let corpus = two_chapter_corpus();
            let tokens = import_tokens(STREAM, &corpus, &TagSet::default()).unwrap();
            let ka: BTreeSet<Pos> = a.iter().map(|s| Pos::from(*s)).collect();
            let kb: BTreeSet<Pos> = b.iter().map(|s| Pos::from(*s)).collect();
            let once = filter_pos(&tokens, &ka);
            prop_assert_eq!(&filter_pos(&once, &ka), &once);
            let both: BTreeSet<Pos> = ka.intersection(&kb).cloned().collect();
            prop_assert_eq!(filter_pos(&once, &kb), filter_pos(&tokens, &both));
        }
    }
}
