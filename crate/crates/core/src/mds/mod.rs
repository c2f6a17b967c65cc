//! Chapter dissimilarities and their 2-D embeddings.
//!
//! Classical (Torgerson) scaling gives a closed-form configuration from the
//! double-centred squared dissimilarities; SMACOF then lowers raw stress
//! from that start.

mod classical;
pub mod jacobi;
mod smacof;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::TermDocMatrix;

pub use classical::{classical_mds, double_center};
pub use smacof::{guttman_transform, smacof, SmacofOptions};

/// Off-diagonal tolerance of the eigensolver, relative to `max(1, ‖B‖_F)`.
pub const EIGEN_TOLERANCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum MdsError {
    #[error("chapter {0} has no tokens")]
    EmptyDocument(u32),
    #[error("eigensolver did not converge within {0} sweeps")]
    NonConvergence(usize),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("labels of the embedding and the dissimilarity matrix differ")]
    LabelMismatch,
    #[error("invalid dissimilarity matrix: {0}")]
    InvalidDissimilarity(String),
}

/// Symmetric, non-negative, zero-diagonal matrix over labelled objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    labels: Vec<String>,
    /// Row-major `n × n`.
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, MdsError> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(MdsError::InvalidDissimilarity(format!(
                "expected a {n} x {n} matrix"
            )));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(MdsError::InvalidDissimilarity(format!("d[{i}][{i}] is not 0")));
            }
            for j in 0..n {
                let d = values[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(MdsError::InvalidDissimilarity(format!("d[{i}][{j}] = {d}")));
                }
                if d != values[j * n + i] {
                    return Err(MdsError::InvalidDissimilarity(format!(
                        "d[{i}][{j}] != d[{j}][{i}]"
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix { labels, values })
    }

    /// Euclidean distances between the given points.
    pub fn from_points(labels: Vec<String>, points: &[[f64; 2]]) -> Result<Self, MdsError> {
        let rows = points
            .iter()
            .map(|p| points.iter().map(|q| distance(*p, *q)).collect())
            .collect();
        Self::new(labels, rows)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub(crate) fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MdsDiagnostics {
    /// All eigenvalues of the double-centred matrix, descending (classical MDS only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eigenvalues: Vec<f64>,
    /// Share of |eigenvalue| mass on negative eigenvalues; non-zero when the input is not Euclidean.
    pub negative_mass_fraction: f64,
    pub stress: f64,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stress_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub labels: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    pub diagnostics: MdsDiagnostics,
}

/// Raw stress: `sum_{i<j} (d_ij - |x_i - x_j|)^2`.
pub fn stress(d: &DissimilarityMatrix, embedding: &Embedding2D) -> Result<f64, MdsError> {
    if d.labels() != embedding.labels.as_slice() {
        return Err(MdsError::LabelMismatch);
    }
    Ok(raw_stress(d, &embedding.coords))
}

pub(crate) fn raw_stress(d: &DissimilarityMatrix, coords: &[[f64; 2]]) -> f64 {
    let n = coords.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r = d.get(i, j) - distance(coords[i], coords[j]);
            sum += r * r;
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChapterMetric {
    /// `1 - cos` between L2-normalised tf-idf vectors.
    #[default]
    Cosine,
    /// `1 - cos` between raw count vectors.
    CosineCounts,
    /// Euclidean distance between relative-frequency vectors.
    Euclidean,
}

impl std::str::FromStr for ChapterMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(ChapterMetric::Cosine),
            "cosine-counts" => Ok(ChapterMetric::CosineCounts),
            "euclidean" => Ok(ChapterMetric::Euclidean),
            other => Err(format!(
                "unknown metric {other:?} (expected cosine, cosine-counts or euclidean)"
            )),
        }
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0)
}

/// `1 - dot` of unit vectors, clamped to [0, 2]. A zero vector is at
/// distance 1 from any non-zero vector and 0 from another zero vector.
fn cosine_distances(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = match (is_zero(&vectors[i]), is_zero(&vectors[j])) {
                (true, true) => 0.0,
                (true, false) | (false, true) => 1.0,
                _ => {
                    let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
                    (1.0 - dot).clamp(0.0, 2.0)
                }
            };
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    rows
}

fn euclidean_distances(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    rows
}

/// Pairwise dissimilarity of chapters (documents of the matrix).
pub fn chapter_dissimilarity(
    matrix: &TermDocMatrix,
    metric: ChapterMetric,
) -> Result<DissimilarityMatrix, MdsError> {
    let docs = matrix.docs();
    for (j, &label) in docs.iter().enumerate() {
        if matrix.column_sum(j) == 0 {
            return Err(MdsError::EmptyDocument(label));
        }
    }
    let vectors: Vec<Vec<f64>> = (0..docs.len())
        .map(|j| match metric {
            ChapterMetric::Cosine => normalize(matrix.tfidf_vector(j).expect("non-empty checked")),
            ChapterMetric::CosineCounts => normalize(matrix.count_vector(j)),
            ChapterMetric::Euclidean => {
                let total = matrix.column_sum(j) as f64;
                matrix.count_vector(j).into_iter().map(|c| c / total).collect()
            }
        })
        .collect();
    let rows = match metric {
        ChapterMetric::Euclidean => euclidean_distances(&vectors),
        _ => cosine_distances(&vectors),
    };
    DissimilarityMatrix::new(docs.iter().map(|d| d.to_string()).collect(), rows)
}

/// Dissimilarity of the `top_n` most frequent lemmas, each profiled by its
/// relative frequency in every chapter (cosine over L2-normalised profiles).
pub fn lemma_dissimilarity(matrix: &TermDocMatrix, top_n: usize) -> Result<DissimilarityMatrix, MdsError> {
    let doc_count = matrix.doc_count();
    let mut totals = vec![0u64; matrix.terms().len()];
    for j in 0..doc_count {
        for (id, n) in matrix.column(j) {
            totals[id] += n;
        }
    }
    let mut ids: Vec<usize> = (0..totals.len()).collect();
    ids.sort_by(|&a, &b| totals[b].cmp(&totals[a]).then_with(|| matrix.terms()[a].cmp(&matrix.terms()[b])));
    ids.truncate(top_n);
    let vectors: Vec<Vec<f64>> = ids
        .iter()
        .map(|&id| {
            let term = &matrix.terms()[id];
            normalize(
                (0..doc_count)
                    .map(|j| match matrix.column_sum(j) {
                        0 => 0.0,
                        total => matrix.count(term, j) as f64 / total as f64,
                    })
                    .collect(),
            )
        })
        .collect();
    let labels = ids.iter().map(|&id| matrix.terms()[id].clone()).collect();
    DissimilarityMatrix::new(labels, cosine_distances(&vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(DissimilarityMatrix::new(labels(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::new(labels(2), vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::new(labels(2), vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::new(labels(2), vec![vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn identical_chapters_are_at_zero() {
        let m = TermDocMatrix::from_documents(vec![1, 2, 3], &[vec!["a", "b"], vec!["a", "b"], vec!["c"]]);
        for metric in [ChapterMetric::Cosine, ChapterMetric::CosineCounts, ChapterMetric::Euclidean] {
            let d = chapter_dissimilarity(&m, metric).unwrap();
            assert!(d.get(0, 1).abs() < 1e-15, "{metric:?}");
        }
        // every term everywhere: all tf-idf vectors vanish
        let same = TermDocMatrix::from_documents(vec![1, 2], &[vec!["a"], vec!["a"]]);
        assert_eq!(chapter_dissimilarity(&same, ChapterMetric::Cosine).unwrap().get(0, 1), 0.0);
    }

    #[test]
    fn disjoint_chapters_are_at_one() {
        let m = TermDocMatrix::from_documents(vec![1, 2], &[vec!["a", "b"], vec!["c"]]);
        let d = chapter_dissimilarity(&m, ChapterMetric::Cosine).unwrap();
        assert!((d.get(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plain_count_cosine() {
        // (1,1,0) vs (1,0,0)
        let m = TermDocMatrix::from_documents(vec![1, 2], &[vec!["x", "y"], vec!["x"]]);
        let d = chapter_dissimilarity(&m, ChapterMetric::CosineCounts).unwrap();
        assert!((d.get(0, 1) - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!((d.get(0, 1) - 0.2929).abs() < 1e-4);
    }

    #[test]
    fn empty_chapter_is_rejected() {
        let m = TermDocMatrix::from_documents(vec![1, 2], &[vec!["a"], Vec::<&str>::new()]);
        assert_eq!(
            chapter_dissimilarity(&m, ChapterMetric::Cosine),
            Err(MdsError::EmptyDocument(2))
        );
    }

    #[test]
    fn lemma_profiles() {
        let m = TermDocMatrix::from_documents(
            vec![1, 2],
            &[vec!["a", "a", "b"], vec!["a", "c", "c", "c"]],
        );
        let d = lemma_dissimilarity(&m, 2).unwrap();
        assert_eq!(d.labels(), ["a", "c"]);
        assert!(d.get(0, 1) > 0.0 && d.get(0, 1) < 1.0);
    }

    #[test]
    fn stress_cases() {
        let d = DissimilarityMatrix::new(labels(2), vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = Embedding2D {
            labels: labels(2),
            coords: vec![[0.0, 0.0], [0.0, 0.0]],
            diagnostics: MdsDiagnostics::default(),
        };
        assert_eq!(stress(&d, &e).unwrap(), 1.0);
        let exact = Embedding2D {
            coords: vec![[0.0, 0.0], [1.0, 0.0]],
            ..e.clone()
        };
        assert_eq!(stress(&d, &exact).unwrap(), 0.0);

        // 3 points: d12=1, d13=2, d23=1; coords at 0, 1, 3 on a line
        let d3 = DissimilarityMatrix::new(
            labels(3),
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
        )
        .unwrap();
        let e3 = Embedding2D {
            labels: labels(3),
            coords: vec![[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]],
            diagnostics: MdsDiagnostics::default(),
        };
        // (1-1)^2 + (2-3)^2 + (1-2)^2
        assert_eq!(stress(&d3, &e3).unwrap(), 2.0);
        let wrong = Embedding2D {
            labels: vec!["x".into(), "y".into(), "z".into()],
            ..e3
        };
        assert_eq!(stress(&d3, &wrong), Err(MdsError::LabelMismatch));
    }
}
