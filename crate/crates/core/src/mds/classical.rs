use super::jacobi::symmetric_eigen;
use super::{raw_stress, DissimilarityMatrix, Embedding2D, MdsDiagnostics, MdsError, EIGEN_TOLERANCE, MAX_SWEEPS};

/// `B = -1/2 · J D² J` with `J = I - 11ᵀ/n`, row-major.
pub fn double_center(d: &DissimilarityMatrix) -> Vec<f64> {
    let n = d.len();
    let sq: Vec<f64> = (0..n * n).map(|k| d.get(k / n, k % n).powi(2)).collect();
    let row_means: Vec<f64> = (0..n)
        .map(|i| sq[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            // D² is symmetric, so column means equal row means
            b[i * n + j] = -0.5 * (sq[i * n + j] - row_means[i] - row_means[j] + grand);
        }
    }
    b
}

/// Torgerson scaling into two dimensions.
///
/// Axes come from the two largest eigenpairs of the double-centred matrix;
/// a negative eigenvalue yields a zero-length axis. Each axis is oriented so
/// that its largest-magnitude coordinate is positive.
pub fn classical_mds(d: &DissimilarityMatrix) -> Result<Embedding2D, MdsError> {
    let n = d.len();
    if n < 2 {
        return Err(MdsError::TooFewPoints(n));
    }
    let b = double_center(d);
    let eig = symmetric_eigen(&b, n, EIGEN_TOLERANCE, MAX_SWEEPS)
        .ok_or(MdsError::NonConvergence(MAX_SWEEPS))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.values[k]).collect();

    let mut coords = vec![[0.0; 2]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let scale = eig.values[k].max(0.0).sqrt();
        let vector = &eig.vectors[k];
        let pivot = (0..n).fold(0, |best, i| {
            if vector[i].abs() > vector[best].abs() {
                i
            } else {
                best
            }
        });
        let sign = if vector[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][axis] = sign * scale * vector[i];
        }
    }
    for axis in 0..2 {
        let mean = coords.iter().map(|c| c[axis]).sum::<f64>() / n as f64;
        coords.iter_mut().for_each(|c| c[axis] -= mean);
    }

    let negative: f64 = eigenvalues.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    let total: f64 = eigenvalues.iter().map(|v| v.abs()).sum();
    let negative_mass_fraction = if total > 0.0 { negative / total } else { 0.0 };
    if negative_mass_fraction > 1e-9 {
        log::warn!(
            "dissimilarities are not Euclidean: {:.3}% of eigenvalue mass is negative",
            100.0 * negative_mass_fraction
        );
    }

    Ok(Embedding2D {
        labels: d.labels().to_vec(),
        diagnostics: MdsDiagnostics {
            eigenvalues,
            negative_mass_fraction,
            stress: raw_stress(d, &coords),
            iterations: eig.sweeps,
            stress_history: Vec::new(),
        },
        coords,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mds::distance;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn zero_matrix_collapses_to_origin() {
        let d = DissimilarityMatrix::new(labels(3), vec![vec![0.0; 3]; 3]).unwrap();
        let e = classical_mds(&d).unwrap();
        assert!(e.coords.iter().all(|c| c == &[0.0, 0.0]));
        assert!(e.diagnostics.eigenvalues.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn equilateral_triangle() {
        let d = DissimilarityMatrix::new(
            labels(3),
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
        )
        .unwrap();
        let e = classical_mds(&d).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!((distance(e.coords[i], e.coords[j]) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn centered_rows_sum_to_zero() {
        let pts = [[0.0, 0.0], [3.0, 1.0], [-2.0, 5.0], [1.0, -4.0]];
        let d = DissimilarityMatrix::from_points(labels(4), &pts).unwrap();
        let b = double_center(&d);
        for i in 0..4 {
            assert!(b[i * 4..(i + 1) * 4].iter().sum::<f64>().abs() < 1e-10);
        }
    }

    #[test]
    fn axes_are_sign_fixed_and_centered() {
        let pts = [[0.0, 0.0], [4.0, 0.0], [0.0, 1.0], [5.0, 2.0]];
        let d = DissimilarityMatrix::from_points(labels(4), &pts).unwrap();
        let e = classical_mds(&d).unwrap();
        for axis in 0..2 {
            let max = e.coords.iter().map(|c| c[axis]).fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(max > 0.0);
            assert!(e.coords.iter().map(|c| c[axis]).sum::<f64>().abs() < 1e-9);
        }
        assert!(e.diagnostics.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn non_euclidean_input_reports_negative_mass() {
        // violates the triangle inequality
        let d = DissimilarityMatrix::new(
            labels(3),
            vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]],
        )
        .unwrap();
        let e = classical_mds(&d).unwrap();
        assert!(e.diagnostics.negative_mass_fraction > 0.0);
    }

    #[test]
    fn single_point_is_rejected() {
        let d = DissimilarityMatrix::new(labels(1), vec![vec![0.0]]).unwrap();
        assert_eq!(classical_mds(&d), Err(MdsError::TooFewPoints(1)));
    }
}
