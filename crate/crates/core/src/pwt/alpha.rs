use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{lattice_from_vectors, norm, Point, Rational};

/// Positive weights with `sum alpha_i v_i = 0` and `sum alpha_i = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaVector {
    pub alphas: Vec<f64>,
    /// `|sum alpha_i v_i|` as computed.
    pub residual: f64,
}

/// Solves `sum alpha_i v_i = 0`, `sum alpha_i = 1` for `d + 1` vectors in dimension `d`.
pub fn alpha_coefficients(dim: usize, vectors: &[Point]) -> Result<AlphaVector> {
    let lattice = lattice_from_vectors(dim, vectors)?;
    let alphas: Vec<f64> = match dim {
        1 => {
            let (a, b) = (vectors[0][0], vectors[1][0]);
            vec![b / (b - a), -a / (b - a)]
        }
        _ => {
            let cross = |p: Point, q: Point| p[0] * q[1] - p[1] * q[0];
            let raw = [
                cross(vectors[1], vectors[2]),
                cross(vectors[2], vectors[0]),
                cross(vectors[0], vectors[1]),
            ];
            // the three cofactors sum to det(v1 - v0, v2 - v0)
            let total: f64 = raw.iter().sum();
            raw.iter().map(|r| r / total).collect()
        }
    };
    debug_assert!(lattice.det_abs() > 0.0);
    let mut sum = [0.0; 2];
    for (a, v) in alphas.iter().zip(vectors) {
        sum[0] += a * v[0];
        sum[1] += a * v[1];
    }
    let residual = norm(sum, dim);
    if alphas.iter().any(|&a| a <= 0.0) {
        return Err(LabError::NoBoundedDynamics(alphas));
    }
    Ok(AlphaVector { alphas, residual })
}

/// Solver tolerance `1e-12 * max |v_i|`.
pub fn alpha_tolerance(dim: usize, vectors: &[Point]) -> f64 {
    1e-12 * vectors.iter().map(|v| norm(*v, dim)).fold(0.0, f64::max)
}

/// Exact weights for a two-branch map on the line.
pub fn alpha_coefficients_exact(vectors: &[Rational]) -> Result<Vec<Rational>> {
    if vectors.len() != 2 {
        return Err(LabError::InvalidMap(format!(
            "torus factor on the line needs 2 vectors, got {}",
            vectors.len()
        )));
    }
    let (a, b) = (vectors[0], vectors[1]);
    if a == b {
        return Err(LabError::RankDeficient {
            det: 0.0,
            tolerance: 0.0,
        });
    }
    let alphas = vec![b / (b - a), -a / (b - a)];
    if alphas.iter().any(|x| *x <= Rational::from_integer(0)) {
        return Err(LabError::NoBoundedDynamics(
            alphas.iter().map(|x| crate::geometry::Scalar::to_f64(*x)).collect(),
        ));
    }
    Ok(alphas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    #[test]
    fn line_example() {
        let a = alpha_coefficients(1, &[[0.3, 0.0], [-0.6, 0.0]]).unwrap();
        assert!((a.alphas[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.alphas[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            alpha_coefficients_exact(&[rat(3, 10), rat(-3, 5)]).unwrap(),
            vec![rat(2, 3), rat(1, 3)]
        );
    }

    #[test]
    fn symmetric_planar_example() {
        let a = alpha_coefficients(2, &[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]).unwrap();
        for x in &a.alphas {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(a.residual < 1e-15);
    }

    #[test]
    fn zero_weight_means_unbounded() {
        let e = alpha_coefficients(2, &[[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).unwrap_err();
        assert!(matches!(e, LabError::NoBoundedDynamics(_)));
        let e = alpha_coefficients(1, &[[0.3, 0.0], [0.6, 0.0]]).unwrap_err();
        assert!(matches!(e, LabError::NoBoundedDynamics(_)));
    }

    #[test]
    fn rank_deficient_reported() {
        let e = alpha_coefficients(2, &[[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]).unwrap_err();
        assert!(matches!(e, LabError::RankDeficient { .. }));
    }
}
