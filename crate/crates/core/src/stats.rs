//! Lemma frequency tables and TF-IDF over chapters.
//!
//! Chapters are the documents. For term `i` in chapter `j`:
//!
//! ```text
//! tf(i, j)    = n(i, j) / sum_k n(k, j)
//! idf(i)      = ln(|D| / df(i))
//! tfidf(i, j) = tf(i, j) * idf(i)
//! ```
//!
//! `df(i)` is the number of chapters containing the term. The logarithm is
//! natural and unsmoothed, so a term that occurs nowhere has no idf.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::{Pos, TokenizedCorpus};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("document {0} has no tokens")]
    EmptyDocument(usize),
    #[error("document position {0} is out of range")]
    UnknownDocument(usize),
    #[error("term {0:?} occurs in no document")]
    UnknownTerm(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub lemma: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub pos: Pos,
    pub rows: Vec<FrequencyRow>,
}

/// Sorts descending by count, ascending by lemma code points on ties.
fn rank_counts(counts: HashMap<&str, u64>) -> Vec<FrequencyRow> {
    let mut rows: Vec<FrequencyRow> = counts
        .into_iter()
        .map(|(lemma, count)| FrequencyRow {
            lemma: lemma.to_string(),
            count,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.lemma.cmp(&b.lemma)));
    rows
}

/// The `top_n` most frequent lemmas tagged `pos`, corpus-wide.
pub fn pos_frequency(tokens: &TokenizedCorpus, pos: &Pos, top_n: usize) -> FrequencyTable {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for token in tokens.tokens().filter(|t| &t.pos == pos) {
        *counts.entry(token.lemma.as_str()).or_default() += 1;
    }
    let mut rows = rank_counts(counts);
    rows.truncate(top_n);
    FrequencyTable {
        pos: pos.clone(),
        rows,
    }
}

/// Which tokens enter the term-document matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Vocabulary {
    All,
    Pos(BTreeSet<Pos>),
}

impl Vocabulary {
    pub fn content() -> Self {
        Vocabulary::Pos(crate::tokenize::content_pos())
    }

    fn admits(&self, pos: &Pos) -> bool {
        match self {
            Vocabulary::All => true,
            Vocabulary::Pos(set) => set.contains(pos),
        }
    }
}

/// Sparse term-by-document counts. Columns are documents, stored as
/// `term id -> count` maps holding only non-zero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocMatrix {
    terms: Vec<String>,
    term_ids: HashMap<String, usize>,
    docs: Vec<u32>,
    columns: Vec<BTreeMap<usize, u64>>,
    column_sums: Vec<u64>,
    doc_freq: Vec<usize>,
}

impl TermDocMatrix {
    /// Builds the matrix from per-document lemma sequences. `labels` name the documents.
    pub fn from_documents<S: AsRef<str>>(labels: Vec<u32>, documents: &[Vec<S>]) -> Self {
        assert_eq!(labels.len(), documents.len(), "one label per document");
        let vocab: BTreeSet<&str> = documents
            .iter()
            .flat_map(|d| d.iter().map(AsRef::as_ref))
            .collect();
        let terms: Vec<String> = vocab.into_iter().map(str::to_string).collect();
        let term_ids: HashMap<String, usize> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let mut doc_freq = vec![0usize; terms.len()];
        let columns: Vec<BTreeMap<usize, u64>> = documents
            .iter()
            .map(|doc| {
                let mut col = BTreeMap::new();
                for term in doc {
                    *col.entry(term_ids[term.as_ref()]).or_insert(0u64) += 1;
                }
                for &id in col.keys() {
                    doc_freq[id] += 1;
                }
                col
            })
            .collect();
        let column_sums = columns.iter().map(|c| c.values().sum()).collect();
        TermDocMatrix {
            terms,
            term_ids,
            docs: labels,
            columns,
            column_sums,
            doc_freq,
        }
    }

    /// One document per chapter; lemmas of admitted tokens are the terms.
    pub fn from_tokens(tokens: &TokenizedCorpus, vocabulary: &Vocabulary) -> Self {
        let labels = tokens.chapters.iter().map(|c| c.index).collect();
        let documents: Vec<Vec<&str>> = tokens
            .chapters
            .iter()
            .map(|c| {
                c.sentences
                    .iter()
                    .flat_map(|s| s.tokens.iter())
                    .filter(|t| vocabulary.admits(&t.pos))
                    .map(|t| t.lemma.as_str())
                    .collect()
            })
            .collect();
        Self::from_documents(labels, &documents)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn docs(&self) -> &[u32] {
        &self.docs
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn term_id(&self, term: &str) -> Option<usize> {
        self.term_ids.get(term).copied()
    }

    /// `n(i, j)`; zero when the term is absent.
    pub fn count(&self, term: &str, doc: usize) -> u64 {
        self.term_id(term)
            .and_then(|id| self.columns.get(doc)?.get(&id).copied())
            .unwrap_or(0)
    }

    /// Non-zero `(term id, count)` entries of a document.
    pub fn column(&self, doc: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.columns[doc].iter().map(|(&id, &n)| (id, n))
    }

    pub fn column_sum(&self, doc: usize) -> u64 {
        self.column_sums[doc]
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.term_id(term).map(|id| self.doc_freq[id]).unwrap_or(0)
    }

    fn check_doc(&self, doc: usize) -> Result<u64, StatsError> {
        let total = *self
            .column_sums
            .get(doc)
            .ok_or(StatsError::UnknownDocument(doc))?;
        if total == 0 {
            return Err(StatsError::EmptyDocument(doc));
        }
        Ok(total)
    }

    pub fn term_frequency(&self, term: &str, doc: usize) -> Result<f64, StatsError> {
        let total = self.check_doc(doc)?;
        Ok(self.count(term, doc) as f64 / total as f64)
    }

    pub fn inverse_document_frequency(&self, term: &str) -> Result<f64, StatsError> {
        let df = self.document_frequency(term);
        if df == 0 {
            return Err(StatsError::UnknownTerm(term.to_string()));
        }
        Ok(idf(self.doc_count(), df))
    }

    pub fn tfidf(&self, term: &str, doc: usize) -> Result<f64, StatsError> {
        let tf = self.term_frequency(term, doc)?;
        let idf = self.inverse_document_frequency(term)?;
        Ok(tf * idf)
    }

    /// Dense tf-idf weights of one document, indexed by term id.
    pub fn tfidf_vector(&self, doc: usize) -> Result<Vec<f64>, StatsError> {
        let total = self.check_doc(doc)? as f64;
        let mut v = vec![0.0; self.terms.len()];
        for (id, n) in self.column(doc) {
            v[id] = (n as f64 / total) * idf(self.doc_count(), self.doc_freq[id]);
        }
        Ok(v)
    }

    /// Dense raw counts of one document, indexed by term id.
    pub fn count_vector(&self, doc: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.terms.len()];
        for (id, n) in self.column(doc) {
            v[id] = n as f64;
        }
        v
    }
}

fn idf(doc_count: usize, df: usize) -> f64 {
    (doc_count as f64 / df as f64).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub lemma: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordList {
    pub chapter_index: u32,
    pub rows: Vec<Keyword>,
}

/// Top-`k` terms of every chapter by tf-idf. Zero scores never qualify, and
/// a chapter without tokens gets an empty list.
pub fn chapter_keywords(matrix: &TermDocMatrix, k: usize) -> Vec<KeywordList> {
    (0..matrix.doc_count())
        .map(|doc| {
            let mut rows: Vec<Keyword> = match matrix.tfidf_vector(doc) {
                Ok(weights) => matrix
                    .column(doc)
                    .map(|(id, _)| Keyword {
                        lemma: matrix.terms[id].clone(),
                        score: weights[id],
                    })
                    .filter(|kw| kw.score > 0.0)
                    .collect(),
                Err(_) => Vec::new(),
            };
            rows.sort_by(|a, b| {
                b.score
                    .partial_cmp(&a.score)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| a.lemma.cmp(&b.lemma))
            });
            rows.truncate(k);
            KeywordList {
                chapter_index: matrix.docs[doc],
                rows,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::{Token, TokenizedChapter, TokenizedSentence};
    use proptest::prelude::*;

    fn toy() -> TermDocMatrix {
        TermDocMatrix::from_documents(vec![1, 2], &[vec!["a", "a", "b"], vec!["b", "c"]])
    }

    #[test]
    fn tf_is_share_of_document() {
        let m = toy();
        assert!((m.term_frequency("a", 0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.term_frequency("c", 0).unwrap(), 0.0);
        assert_eq!(m.term_frequency("zzz", 0).unwrap(), 0.0);
        let single = TermDocMatrix::from_documents(vec![1], &[vec!["x"]]);
        assert_eq!(single.term_frequency("x", 0).unwrap(), 1.0);
    }

    #[test]
    fn tf_of_empty_document_fails() {
        let m = TermDocMatrix::from_documents(vec![1, 2], &[vec!["a"], Vec::<&str>::new()]);
        assert_eq!(m.term_frequency("a", 1), Err(StatsError::EmptyDocument(1)));
        assert_eq!(m.term_frequency("a", 5), Err(StatsError::UnknownDocument(5)));
    }

    #[test]
    fn idf_values() {
        let m = toy();
        assert!((m.inverse_document_frequency("a").unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(m.inverse_document_frequency("b").unwrap(), 0.0);
        assert_eq!(
            m.inverse_document_frequency("q"),
            Err(StatsError::UnknownTerm("q".into()))
        );
    }

    #[test]
    fn tfidf_on_toy_corpus() {
        let m = toy();
        // (2/3) ln 2
        assert!((m.tfidf("a", 0).unwrap() - 0.462_098_120_373_296_9).abs() < 1e-15);
        assert_eq!(m.tfidf("b", 0).unwrap(), 0.0);
        assert_eq!(m.tfidf("b", 1).unwrap(), 0.0);
        assert_eq!(m.tfidf("a", 1).unwrap(), 0.0);
    }

    #[test]
    fn keywords_on_toy_corpus() {
        let lists = chapter_keywords(&toy(), 1);
        assert_eq!(lists[0].chapter_index, 1);
        assert_eq!(lists[0].rows.len(), 1);
        assert_eq!(lists[0].rows[0].lemma, "a");
        assert!((lists[0].rows[0].score - 0.4621).abs() < 1e-4);
        let long = chapter_keywords(&toy(), 10);
        assert_eq!(long[1].rows.len(), 1);
        assert_eq!(long[1].rows[0].lemma, "c");
    }

    #[test]
    fn keywords_empty_when_every_term_everywhere() {
        let m = TermDocMatrix::from_documents(vec![1, 2], &[vec!["a", "b"], vec!["b", "a", "a"]]);
        assert!(chapter_keywords(&m, 5).iter().all(|l| l.rows.is_empty()));
    }

    #[test]
    fn keyword_ties_break_by_lemma() {
        let m = TermDocMatrix::from_documents(vec![1, 2], &[vec!["y", "x"], vec!["z"]]);
        let rows = &chapter_keywords(&m, 5)[0].rows;
        assert_eq!(rows[0].lemma, "x");
        assert_eq!(rows[1].lemma, "y");
    }

    fn tokenized(docs: &[&[(&str, &str)]]) -> TokenizedCorpus {
        TokenizedCorpus {
            source_label: "t".into(),
            chapters: docs
                .iter()
                .enumerate()
                .map(|(i, toks)| TokenizedChapter {
                    index: i as u32 + 1,
                    title: String::new(),
                    sentences: vec![TokenizedSentence {
                        ordinal: 0,
                        text: String::new(),
                        tokens: toks.iter().map(|(l, p)| Token::new(*l, *p, *l)).collect(),
                    }],
                })
                .collect(),
        }
    }

    #[test]
    fn frequency_ranks_and_ties() {
        let t = tokenized(&[
            &[("源氏", "名詞"), ("は", "助詞"), ("夫人", "名詞")],
            &[("源氏", "名詞"), ("姫君", "名詞")],
        ]);
        let table = pos_frequency(&t, &Pos::from("名詞"), 30);
        let got: Vec<_> = table.rows.iter().map(|r| (r.lemma.as_str(), r.count)).collect();
        assert_eq!(got, [("源氏", 2), ("夫人", 1), ("姫君", 1)]);
        assert_eq!(pos_frequency(&t, &Pos::from("名詞"), 1).rows.len(), 1);
        let total: u64 = table.rows.iter().map(|r| r.count).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn frequency_of_empty_corpus() {
        let t = TokenizedCorpus {
            source_label: "t".into(),
            chapters: vec![],
        };
        assert!(pos_frequency(&t, &Pos::from("名詞"), 5).rows.is_empty());
    }

    #[test]
    fn vocabulary_filter_applies() {
        let t = tokenized(&[&[("源氏", "名詞"), ("は", "助詞")]]);
        let m = TermDocMatrix::from_tokens(&t, &Vocabulary::content());
        assert_eq!(m.terms(), ["源氏"]);
        assert_eq!(m.column_sum(0), 1);
        let all = TermDocMatrix::from_tokens(&t, &Vocabulary::All);
        assert_eq!(all.terms().len(), 2);
    }

    proptest! {
        #[test]
        fn tf_sums_to_one(docs in proptest::collection::vec(
            proptest::collection::vec(0u8..8, 1..20), 1..6)) {
            let docs: Vec<Vec<String>> = docs.iter()
                .map(|d| d.iter().map(|t| format!("t{t}")).collect()).collect();
            let labels = (1..=docs.len() as u32).collect();
            let m = TermDocMatrix::from_documents(labels, &docs);
            for j in 0..m.doc_count() {
                let s: f64 = m.terms().iter().map(|t| m.term_frequency(t, j).unwrap()).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn idf_decreases_with_document_frequency(docs in proptest::collection::vec(
            proptest::collection::vec(0u8..6, 0..10), 1..6)) {
            let docs: Vec<Vec<String>> = docs.iter()
                .map(|d| d.iter().map(|t| format!("t{t}")).collect()).collect();
            let labels = (1..=docs.len() as u32).collect();
            let m = TermDocMatrix::from_documents(labels, &docs);
            for a in m.terms() {
                for b in m.terms() {
                    if m.document_frequency(a) < m.document_frequency(b) {
                        prop_assert!(m.inverse_document_frequency(a).unwrap()
                            > m.inverse_document_frequency(b).unwrap());
                    }
                }
            }
        }
    }
}
