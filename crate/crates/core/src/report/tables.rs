//! CSV renderings of the analysis results. UTF-8, header row, LF endings.

use crate::corpus::CorpusStats;
use crate::mds::Embedding2D;
use crate::sentiment::{ChapterSeries, SentenceScore, SentimentHistogram};
use crate::stats::{FrequencyTable, KeywordList};

fn write_rows<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// `rank,lemma,value` for a single part of speech.
pub fn frequency_csv(table: &FrequencyTable) -> String {
    write_rows(
        &["rank", "lemma", "value"],
        table
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| [(i + 1).to_string(), r.lemma.clone(), r.count.to_string()]),
    )
}

/// `pos,rank,lemma,value` for several parts of speech.
pub fn frequency_tables_csv(tables: &[FrequencyTable]) -> String {
    write_rows(
        &["pos", "rank", "lemma", "value"],
        tables.iter().flat_map(|t| {
            t.rows.iter().enumerate().map(move |(i, r)| {
                [
                    t.pos.to_string(),
                    (i + 1).to_string(),
                    r.lemma.clone(),
                    r.count.to_string(),
                ]
            })
        }),
    )
}

/// `chapter,rank,lemma,value`.
pub fn keywords_csv(lists: &[KeywordList]) -> String {
    write_rows(
        &["chapter", "rank", "lemma", "value"],
        lists.iter().flat_map(|l| {
            l.rows.iter().enumerate().map(move |(i, k)| {
                [
                    l.chapter_index.to_string(),
                    (i + 1).to_string(),
                    k.lemma.clone(),
                    k.score.to_string(),
                ]
            })
        }),
    )
}

/// `bin,lower,upper,count`.
pub fn histogram_csv(hist: &SentimentHistogram) -> String {
    let last = hist.counts.len().saturating_sub(1);
    write_rows(
        &["bin", "lower", "upper", "count"],
        hist.counts.iter().enumerate().map(|(i, n)| {
            let upper = if i == last { 1.0 } else { hist.lower_edge(i + 1) };
            [
                i.to_string(),
                hist.lower_edge(i).to_string(),
                upper.to_string(),
                n.to_string(),
            ]
        }),
    )
}

/// `chapter,title,mean,scored,empty`.
pub fn series_csv(series: &ChapterSeries, titles: &[(u32, String)]) -> String {
    write_rows(
        &["chapter", "title", "mean", "scored", "empty"],
        series.rows.iter().map(|r| {
            let title = titles
                .iter()
                .find(|(i, _)| *i == r.chapter_index)
                .map(|(_, t)| t.clone())
                .unwrap_or_default();
            [
                r.chapter_index.to_string(),
                title,
                r.mean.to_string(),
                r.scored.to_string(),
                r.empty.to_string(),
            ]
        }),
    )
}

/// `chapter,ordinal,matched,score,label`; unscored sentences have an empty score.
pub fn sentence_scores_csv(scores: &[SentenceScore]) -> String {
    write_rows(
        &["chapter", "ordinal", "matched", "score", "label"],
        scores.iter().map(|s| {
            [
                s.chapter_index.to_string(),
                s.ordinal.to_string(),
                s.matched_count.to_string(),
                s.score.map(|v| v.to_string()).unwrap_or_default(),
                format!("{:?}", s.label),
            ]
        }),
    )
}

/// `label,x,y`.
pub fn coords_csv(embedding: &Embedding2D) -> String {
    write_rows(
        &["label", "x", "y"],
        embedding
            .labels
            .iter()
            .zip(&embedding.coords)
            .map(|(l, c)| [l.clone(), c[0].to_string(), c[1].to_string()]),
    )
}

pub fn corpus_stats_json(stats: &CorpusStats) -> String {
    let mut s = serde_json::to_string_pretty(stats).expect("stats serialize");
    s.push('\n');
    s
}
