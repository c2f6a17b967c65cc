use super::{distance, raw_stress, DissimilarityMatrix, Embedding2D, MdsDiagnostics, MdsError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmacofOptions {
    pub max_iter: usize,
    /// Stop once `(prev - next) / prev` drops below this.
    pub eps: f64,
}

impl Default for SmacofOptions {
    fn default() -> Self {
        SmacofOptions {
            max_iter: 500,
            eps: 1e-9,
        }
    }
}

/// One Guttman transform with unit weights: `X' = (1/n) B(X) X`.
/// Coincident pairs contribute nothing.
pub fn guttman_transform(d: &DissimilarityMatrix, coords: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = coords.len();
    let mut next = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut acc = [0.0; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let dist = distance(coords[i], coords[j]);
            if dist > 0.0 {
                let ratio = d.get(i, j) / dist;
                acc[0] += ratio * (coords[i][0] - coords[j][0]);
                acc[1] += ratio * (coords[i][1] - coords[j][1]);
            }
        }
        next[i] = [acc[0] / n as f64, acc[1] / n as f64];
    }
    next
}

/// Stress majorization from `init`. The returned diagnostics carry the
/// stress of every iterate, starting with `init`'s.
pub fn smacof(
    d: &DissimilarityMatrix,
    init: &Embedding2D,
    options: SmacofOptions,
) -> Result<Embedding2D, MdsError> {
    if d.labels() != init.labels.as_slice() {
        return Err(MdsError::LabelMismatch);
    }
    let mut coords = init.coords.clone();
    let mut current = raw_stress(d, &coords);
    let mut history = vec![current];
    let mut iterations = 0;

    while current > 0.0 && iterations < options.max_iter {
        let next = guttman_transform(d, &coords);
        let next_stress = raw_stress(d, &next);
        iterations += 1;
        if next_stress > current {
            // rounding at the optimum; keep the better iterate
            break;
        }
        history.push(next_stress);
        let decrease = (current - next_stress) / current;
        coords = next;
        current = next_stress;
        if decrease < options.eps {
            break;
        }
    }

    Ok(Embedding2D {
        labels: init.labels.clone(),
        coords,
        diagnostics: MdsDiagnostics {
            stress: current,
            iterations,
            stress_history: history,
            ..init.diagnostics.clone()
        },
    })
}
