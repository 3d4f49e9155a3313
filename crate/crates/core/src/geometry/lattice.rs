use serde::Serialize;

use super::Point;
use crate::error::{LabError, Result};

/// Relative rank tolerance: `|det| <= RANK_TOL * prod |b_j|` is rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Lattice spanned by `v_1 - v_0, ..., v_d - v_0` (d = 1 or 2).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Point>,
    det_abs: f64,
    #[serde(skip)]
    inverse: [[f64; 2]; 2],
}

impl Lattice {
    /// Builds the lattice directly from `d` basis vectors.
    pub fn from_basis(dim: usize, basis: &[Point]) -> Result<Self> {
        if !(1..=2).contains(&dim) || basis.len() != dim {
            return Err(LabError::InvalidMap(format!(
                "lattice needs {dim} basis vectors in dimension {dim}, got {}",
                basis.len()
            )));
        }
        if basis.iter().flatten().any(|c| !c.is_finite()) {
            return Err(LabError::InvalidMap("non-finite lattice vector".into()));
        }
        let (det, norms) = match dim {
            1 => (basis[0][0], basis[0][0].abs()),
            _ => (
                basis[0][0] * basis[1][1] - basis[1][0] * basis[0][1],
                norm(basis[0], 2) * norm(basis[1], 2),
            ),
        };
        let tolerance = RANK_TOL * norms;
        if det.abs() <= tolerance || det == 0.0 {
            return Err(LabError::RankDeficient {
                det: det.abs(),
                tolerance,
            });
        }
        let inverse = match dim {
            1 => [[1.0 / det, 0.0], [0.0, 0.0]],
            _ => [
                [basis[1][1] / det, -basis[1][0] / det],
                [-basis[0][1] / det, basis[0][0] / det],
            ],
        };
        Ok(Self {
            dim,
            basis: basis.to_vec(),
            det_abs: det.abs(),
            inverse,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    /// Volume of the torus `R^d / L`.
    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    /// Coordinates of `x` in the lattice basis.
    pub fn coords(&self, x: Point) -> Point {
        match self.dim {
            1 => [x[0] * self.inverse[0][0], 0.0],
            _ => [
                self.inverse[0][0] * x[0] + self.inverse[0][1] * x[1],
                self.inverse[1][0] * x[0] + self.inverse[1][1] * x[1],
            ],
        }
    }

    pub fn from_coords(&self, c: Point) -> Point {
        let mut out = [0.0; 2];
        for (j, b) in self.basis.iter().enumerate() {
            out[0] += c[j] * b[0];
            out[1] += c[j] * b[1];
        }
        out
    }

    /// Lattice vector `sum k_j b_j`.
    pub fn vector(&self, k: [i64; 2]) -> Point {
        self.from_coords([k[0] as f64, k[1] as f64])
    }

    /// Canonical projection onto the fundamental domain (lattice coordinates in `[0,1)^d`).
    /// On the line the domain is `[0, |b|)` whatever the sign of the basis vector.
    pub fn reduce(&self, x: Point) -> Point {
        if self.dim == 1 {
            let b = self.det_abs;
            let mut r = x[0] - (x[0] / b).floor() * b;
            if r >= b || r < 0.0 {
                r = 0.0;
            }
            return [r, 0.0];
        }
        let mut c = self.coords(x);
        for cj in c.iter_mut().take(self.dim) {
            *cj -= cj.floor();
            if *cj >= 1.0 {
                *cj = 0.0;
            }
        }
        self.from_coords(c)
    }

    /// Distance on the torus `R^d / L`.
    pub fn torus_distance(&self, a: Point, b: Point) -> f64 {
        let d = self.reduce([a[0] - b[0], a[1] - b[1]]);
        let range: &[i64] = &[-1, 0, 1];
        let mut best = f64::INFINITY;
        for &i in range {
            for &j in if self.dim == 2 { range } else { &[0][..] } {
                let l = self.vector([i, j]);
                best = best.min(norm([d[0] + l[0], d[1] + l[1]], self.dim));
            }
        }
        best
    }
}

pub fn norm(v: Point, dim: usize) -> f64 {
    if dim == 1 {
        v[0].abs()
    } else {
        v[0].hypot(v[1])
    }
}

/// Lattice generated by the differences `v_i - v_0` of `d + 1` translation vectors.
pub fn lattice_from_vectors(dim: usize, vectors: &[Point]) -> Result<Lattice> {
    if vectors.len() != dim + 1 {
        return Err(LabError::InvalidMap(format!(
            "torus factor needs exactly {} vectors, got {}",
            dim + 1,
            vectors.len()
        )));
    }
    let v0 = vectors[0];
    let basis: Vec<Point> = vectors[1..]
        .iter()
        .map(|v| [v[0] - v0[0], v[1] - v0[1]])
        .collect();
    Lattice::from_basis(dim, &basis)
}

/// Public alias matching the operation name used throughout the docs.
pub fn reduce_to_fundamental(lattice: &Lattice, x: Point) -> Point {
    lattice.reduce(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn planar_example() {
        let l = lattice_from_vectors(2, &[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]).unwrap();
        assert_eq!(l.basis(), &[[-1.0, 1.0], [-2.0, -1.0]]);
        assert_eq!(l.det_abs(), 3.0);
    }

    #[test]
    fn line_example() {
        let l = lattice_from_vectors(1, &[[0.3, 0.0], [-0.6, 0.0]]).unwrap();
        assert!((l.basis()[0][0] + 0.9).abs() < 1e-15);
        assert!((l.det_abs() - 0.9).abs() < 1e-15);
        assert!((l.reduce([1.0, 0.0])[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn collinear_is_rank_deficient() {
        let err = lattice_from_vectors(2, &[[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]).unwrap_err();
        assert!(matches!(err, LabError::RankDeficient { .. }));
    }

    #[test]
    fn unit_square_reduction() {
        let l = Lattice::from_basis(2, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(l.reduce([0.25, 0.75]), [0.25, 0.75]);
        assert_eq!(l.reduce([1.25, -0.25]), [0.25, 0.75]);
    }

    proptest! {
        #[test]
        fn reduction_ignores_lattice_shifts(
            a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
            x in -3.0f64..3.0, y in -3.0f64..3.0, i in -5i64..5, j in -5i64..5,
        ) {
            prop_assume!((a * d - b * c).abs() > 0.1);
            let l = Lattice::from_basis(2, &[[a, b], [c, d]]).unwrap();
            let lam = l.vector([i, j]);
            let r1 = l.reduce([x, y]);
            let r2 = l.reduce([x + lam[0], y + lam[1]]);
            prop_assert!(l.torus_distance(r1, r2) < 1e-9);
            let again = l.reduce(r1);
            prop_assert!(l.torus_distance(again, r1) < 1e-12);
        }
    }
}
