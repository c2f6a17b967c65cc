//! Corpus analytics for chaptered Japanese prose: lemma frequency tables,
//! per-chapter TF-IDF keywords, polarity-lexicon sentiment curves, word
//! co-occurrence networks and 2-D MDS maps of chapters, with deterministic
//! CSV/SVG/JSON output.

pub mod corpus;
pub mod mds;
pub mod network;
pub mod report;
pub mod sentiment;
pub mod stats;
pub mod tokenize;
