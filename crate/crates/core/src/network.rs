//! Sentence-level word co-occurrence graph and its DOT / GraphML / JSON export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::{Pos, TokenizedCorpus};

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("unsupported export format {0:?} (expected dot, graphml or json)")]
    UnsupportedFormat(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStats {
    /// Token occurrences of the lemma.
    pub frequency: u64,
    /// Sentences containing the lemma.
    pub sentences: u64,
}

/// Undirected weighted graph. Edge keys hold the endpoints in code-point
/// order, so `(a, b)` and `(b, a)` name the same edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CooccurrenceGraph {
    pub nodes: BTreeMap<String, NodeStats>,
    pub edges: BTreeMap<(String, String), u64>,
    /// Sentences the graph was built from; the base for PMI.
    pub sentence_count: u64,
}

fn edge_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CooccurrenceGraph {
    pub fn weight(&self, a: &str, b: &str) -> u64 {
        self.edges.get(&edge_key(a, b)).copied().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn degrees(&self) -> BTreeMap<&str, usize> {
        let mut deg = BTreeMap::new();
        for (a, b) in self.edges.keys() {
            *deg.entry(a.as_str()).or_default() += 1;
            *deg.entry(b.as_str()).or_default() += 1;
        }
        deg
    }

    /// Pointwise mutual information and Jaccard overlap of an edge, from
    /// sentence counts. `None` for a missing edge.
    pub fn derived(&self, a: &str, b: &str) -> Option<EdgeDerived> {
        let w = self.weight(a, b);
        if w == 0 {
            return None;
        }
        let sa = self.nodes.get(a)?.sentences as f64;
        let sb = self.nodes.get(b)?.sentences as f64;
        let w = w as f64;
        Some(EdgeDerived {
            pmi: (w * self.sentence_count as f64 / (sa * sb)).ln(),
            jaccard: w / (sa + sb - w),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDerived {
    pub pmi: f64,
    pub jaccard: f64,
}

/// Counts, per sentence, each unordered pair of distinct lemmas among the
/// tokens whose tag is in `keep_pos`. Lemmas rarer than `min_node_freq`
/// tokens are removed with their edges.
pub fn build_cooccurrence(
    tokens: &TokenizedCorpus,
    keep_pos: &BTreeSet<Pos>,
    min_node_freq: u64,
) -> CooccurrenceGraph {
    let mut graph = CooccurrenceGraph::default();
    for sentence in tokens.chapters.iter().flat_map(|c| c.sentences.iter()) {
        graph.sentence_count += 1;
        let mut present: BTreeSet<&str> = BTreeSet::new();
        for t in sentence.tokens.iter().filter(|t| keep_pos.contains(&t.pos)) {
            graph.nodes.entry(t.lemma.clone()).or_default().frequency += 1;
            present.insert(t.lemma.as_str());
        }
        let present: Vec<&str> = present.into_iter().collect();
        for (i, a) in present.iter().enumerate() {
            graph.nodes.get_mut(*a).expect("inserted above").sentences += 1;
            // `present` is sorted, so (a, b) is already canonical
            for b in &present[i + 1..] {
                *graph
                    .edges
                    .entry((a.to_string(), b.to_string()))
                    .or_default() += 1;
            }
        }
    }
    graph.nodes.retain(|_, s| s.frequency >= min_node_freq);
    let nodes = &graph.nodes;
    graph
        .edges
        .retain(|(a, b), _| nodes.contains_key(a) && nodes.contains_key(b));
    graph
}

/// Drops edges lighter than `min_edge_weight`, then optionally keeps only the
/// `top_k_nodes` most frequent nodes (ties by lemma). Nodes left without any
/// edge by this pruning are dropped too; nodes that had no edge to begin with
/// are kept.
pub fn prune(
    graph: &CooccurrenceGraph,
    min_edge_weight: u64,
    top_k_nodes: Option<usize>,
) -> CooccurrenceGraph {
    let before = graph.degrees();
    let mut nodes = graph.nodes.clone();
    if let Some(k) = top_k_nodes {
        let mut ranked: Vec<(&String, &NodeStats)> = graph.nodes.iter().collect();
        ranked.sort_by(|a, b| b.1.frequency.cmp(&a.1.frequency).then_with(|| a.0.cmp(b.0)));
        let keep: BTreeSet<&String> = ranked.into_iter().take(k).map(|(l, _)| l).collect();
        nodes.retain(|l, _| keep.contains(l));
    }
    let edges: BTreeMap<(String, String), u64> = graph
        .edges
        .iter()
        .filter(|((a, b), &w)| w >= min_edge_weight && nodes.contains_key(a) && nodes.contains_key(b))
        .map(|(k, &w)| (k.clone(), w))
        .collect();
    let mut pruned = CooccurrenceGraph {
        nodes,
        edges,
        sentence_count: graph.sentence_count,
    };
    let connected: BTreeSet<String> = pruned.degrees().keys().map(|l| l.to_string()).collect();
    pruned
        .nodes
        .retain(|l, _| !before.contains_key(l.as_str()) || connected.contains(l));
    pruned
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    GraphMl,
    Json,
}

impl FromStr for GraphFormat {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(GraphFormat::Dot),
            "graphml" => Ok(GraphFormat::GraphMl),
            "json" => Ok(GraphFormat::Json),
            _ => Err(NetworkError::UnsupportedFormat(s.to_string())),
        }
    }
}

impl GraphFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::Dot => "dot",
            GraphFormat::GraphMl => "graphml",
            GraphFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExportOptions {
    /// Also emit `pmi` and `jaccard` edge attributes.
    pub derived: bool,
}

pub fn export_graph(graph: &CooccurrenceGraph, format: GraphFormat) -> String {
    export_graph_with(graph, format, ExportOptions::default())
}

pub fn export_graph_with(
    graph: &CooccurrenceGraph,
    format: GraphFormat,
    options: ExportOptions,
) -> String {
    match format {
        GraphFormat::Dot => to_dot(graph, options),
        GraphFormat::GraphMl => to_graphml(graph, options),
        GraphFormat::Json => to_json(graph, options),
    }
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn to_dot(graph: &CooccurrenceGraph, options: ExportOptions) -> String {
    let mut out = String::from("graph G {\n");
    for (lemma, stats) in &graph.nodes {
        writeln!(out, "  {} [frequency={}];", dot_quote(lemma), stats.frequency).unwrap();
    }
    for ((a, b), w) in &graph.edges {
        write!(out, "  {} -- {} [weight={w}", dot_quote(a), dot_quote(b)).unwrap();
        if options.derived {
            if let Some(d) = graph.derived(a, b) {
                write!(out, ", pmi={}, jaccard={}", d.pmi, d.jaccard).unwrap();
            }
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn to_graphml(graph: &CooccurrenceGraph, options: ExportOptions) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n  \
         <key id=\"frequency\" for=\"node\" attr.name=\"frequency\" attr.type=\"long\"/>\n  \
         <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n",
    );
    if options.derived {
        out.push_str(
            "  <key id=\"pmi\" for=\"edge\" attr.name=\"pmi\" attr.type=\"double\"/>\n  \
             <key id=\"jaccard\" for=\"edge\" attr.name=\"jaccard\" attr.type=\"double\"/>\n",
        );
    }
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for (lemma, stats) in &graph.nodes {
        writeln!(
            out,
            "    <node id=\"{}\"><data key=\"frequency\">{}</data></node>",
            xml_escape(lemma),
            stats.frequency
        )
        .unwrap();
    }
    for ((a, b), w) in &graph.edges {
        write!(
            out,
            "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{w}</data>",
            xml_escape(a),
            xml_escape(b)
        )
        .unwrap();
        if options.derived {
            if let Some(d) = graph.derived(a, b) {
                write!(
                    out,
                    "<data key=\"pmi\">{}</data><data key=\"jaccard\">{}</data>",
                    d.pmi, d.jaccard
                )
                .unwrap();
            }
        }
        out.push_str("</edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonNode {
    pub id: String,
    pub frequency: u64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonEdge {
    pub source: String,
    pub target: String,
    pub weight: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jaccard: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonGraph {
    pub nodes: Vec<JsonNode>,
    pub edges: Vec<JsonEdge>,
}

fn to_json(graph: &CooccurrenceGraph, options: ExportOptions) -> String {
    let doc = JsonGraph {
        nodes: graph
            .nodes
            .iter()
            .map(|(id, s)| JsonNode {
                id: id.clone(),
                frequency: s.frequency,
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|((a, b), &weight)| {
                let d = options.derived.then(|| graph.derived(a, b)).flatten();
                JsonEdge {
                    source: a.clone(),
                    target: b.clone(),
                    weight,
                    pmi: d.map(|d| d.pmi),
                    jaccard: d.map(|d| d.jaccard),
                }
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::{Token, TokenizedChapter, TokenizedSentence};

    fn corpus(sentences: &[&[&str]]) -> TokenizedCorpus {
        TokenizedCorpus {
            source_label: "t".into(),
            chapters: vec![TokenizedChapter {
                index: 1,
                title: String::new(),
                sentences: sentences
                    .iter()
                    .enumerate()
                    .map(|(i, words)| TokenizedSentence {
                        ordinal: i,
                        text: words.concat(),
                        tokens: words.iter().map(|w| Token::new(*w, "名詞", *w)).collect(),
                    })
                    .collect(),
            }],
        }
    }

    fn nouns() -> BTreeSet<Pos> {
        [Pos::from("名詞")].into_iter().collect()
    }

    fn example() -> CooccurrenceGraph {
        build_cooccurrence(&corpus(&[&["a", "b", "c"], &["a", "b"]]), &nouns(), 1)
    }

    #[test]
    fn sentence_pairs_are_counted() {
        let g = example();
        assert_eq!(g.weight("a", "b"), 2);
        assert_eq!(g.weight("b", "a"), 2);
        assert_eq!(g.weight("a", "c"), 1);
        assert_eq!(g.weight("c", "b"), 1);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.nodes["a"].frequency, 2);
    }

    #[test]
    fn singletons_make_no_edges() {
        let g = build_cooccurrence(&corpus(&[&["a"], &["b"]]), &nouns(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn repeats_are_deduplicated_and_no_self_loops() {
        let g = build_cooccurrence(&corpus(&[&["a", "a", "b"]]), &nouns(), 1);
        assert_eq!(g.weight("a", "b"), 1);
        assert_eq!(g.weight("a", "a"), 0);
        assert_eq!(g.nodes["a"].frequency, 2);
        assert_eq!(g.nodes["a"].sentences, 1);
    }

    #[test]
    fn min_node_freq_removes_edges() {
        let g = build_cooccurrence(&corpus(&[&["a", "b", "c"], &["a", "b"]]), &nouns(), 2);
        assert!(!g.nodes.contains_key("c"));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn prune_by_weight() {
        let g = prune(&example(), 2, None);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight("a", "b"), 2);
        assert!(!g.nodes.contains_key("c"));
    }

    #[test]
    fn prune_identity_and_empty() {
        let g = example();
        assert_eq!(prune(&g, 1, None), g);
        let isolated = build_cooccurrence(&corpus(&[&["a", "b"], &["z"]]), &nouns(), 1);
        assert_eq!(prune(&isolated, 1, None), isolated);
        let empty = prune(&g, 1, Some(0));
        assert_eq!(empty.node_count(), 0);
        assert_eq!(empty.edge_count(), 0);
    }

    #[test]
    fn prune_top_k() {
        let g = build_cooccurrence(&corpus(&[&["a", "b", "c"], &["a", "b"], &["a"]]), &nouns(), 1);
        let top = prune(&g, 1, Some(2));
        assert_eq!(top.nodes.keys().collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(top.edge_count(), 1);
    }

    #[test]
    fn derived_metrics() {
        let g = example();
        let d = g.derived("a", "c").unwrap();
        // w=1, N=2, s_a=2, s_c=1
        assert!((d.pmi - 0.0).abs() < 1e-15);
        assert!((d.jaccard - 0.5).abs() < 1e-15);
        assert!(g.derived("a", "zz").is_none());
    }

    #[test]
    fn dot_export() {
        let g = build_cooccurrence(&corpus(&[&["a", "b"]]), &nouns(), 1);
        let dot = export_graph(&g, GraphFormat::Dot);
        assert_eq!(dot.matches(" -- ").count(), 1);
        assert!(dot.starts_with("graph G {"));
        assert!(dot.contains("\"a\" -- \"b\" [weight=1];"));
    }

    #[test]
    fn empty_exports_are_valid() {
        let g = CooccurrenceGraph::default();
        assert_eq!(export_graph(&g, GraphFormat::Dot), "graph G {\n}\n");
        let ml = export_graph(&g, GraphFormat::GraphMl);
        assert!(ml.contains("attr.name=\"weight\"") && ml.ends_with("</graphml>\n"));
        let json: JsonGraph = serde_json::from_str(&export_graph(&g, GraphFormat::Json)).unwrap();
        assert!(json.nodes.is_empty() && json.edges.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let g = example();
        let json: JsonGraph = serde_json::from_str(&export_graph(&g, GraphFormat::Json)).unwrap();
        let nodes: Vec<_> = json.nodes.iter().map(|n| (n.id.as_str(), n.frequency)).collect();
        assert_eq!(nodes, [("a", 2), ("b", 2), ("c", 1)]);
        let edges: BTreeMap<_, _> = json
            .edges
            .iter()
            .map(|e| ((e.source.clone(), e.target.clone()), e.weight))
            .collect();
        assert_eq!(edges, g.edges);
    }

    #[test]
    fn quoting_and_escaping() {
        let g = build_cooccurrence(&corpus(&[&["a\"<", "b&"]]), &nouns(), 1);
        assert!(export_graph(&g, GraphFormat::Dot).contains("\"a\\\"<\""));
        assert!(export_graph(&g, GraphFormat::GraphMl).contains("a&quot;&lt;"));
    }

    #[test]
    fn unsupported_format() {
        assert_eq!(
            "gexf".parse::<GraphFormat>(),
            Err(NetworkError::UnsupportedFormat("gexf".into()))
        );
        assert_eq!("GraphML".parse::<GraphFormat>(), Ok(GraphFormat::GraphMl));
    }

    #[test]
    fn exports_are_repeatable() {
        let g = example();
        for f in [GraphFormat::Dot, GraphFormat::GraphMl, GraphFormat::Json] {
            let opts = ExportOptions { derived: true };
            assert_eq!(export_graph_with(&g, f, opts), export_graph_with(&g.clone(), f, opts));
        }
    }
}
