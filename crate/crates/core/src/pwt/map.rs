use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{norm, Domain, Piece, Point};

/// Finite symbol sequence `i(x), i(F x), i(F^2 x), ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Itinerary {
    pub symbols: Vec<u32>,
}

impl Itinerary {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Visit counters `b_i^{(k)}` and the endpoint of a length-`k` orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitStats {
    pub k: u64,
    pub visit_counts: Vec<u64>,
    pub final_point: Point,
    /// `|F^k x - (x + sum_i b_i v_i)|`.
    pub reconstruction_error: f64,
}

/// Sampled validity certificate for a map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapValidation {
    pub samples: usize,
    pub uncovered_fraction: f64,
    pub overlap_fraction: f64,
    pub escape_fraction: f64,
}

impl MapValidation {
    /// Overlaps must have empty interior, which sampling can only bound.
    pub fn is_valid(&self, overlap_tolerance: f64) -> bool {
        self.uncovered_fraction == 0.0 && self.escape_fraction == 0.0 && self.overlap_fraction <= overlap_tolerance
    }
}

/// Piecewise translation `F(x) = x + v_{i(x)}` on `domain`.
///
/// The piece index `i(x)` is the lowest index whose piece contains `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PwtMap {
    domain: Domain,
    pieces: Vec<Piece>,
    vectors: Vec<Point>,
    /// Slack for domain membership after a step (flat domains only).
    #[serde(skip)]
    tol: f64,
}

impl PwtMap {
    pub fn new(domain: Domain, pieces: Vec<Piece>, vectors: Vec<Point>) -> Result<Self> {
        domain.validate()?;
        if pieces.is_empty() || pieces.len() != vectors.len() {
            return Err(LabError::InvalidMap(format!(
                "{} pieces but {} translation vectors",
                pieces.len(),
                vectors.len()
            )));
        }
        if vectors.iter().flatten().any(|c| !c.is_finite()) {
            return Err(LabError::InvalidMap("non-finite translation vector".into()));
        }
        if domain.dim() == 1 && vectors.iter().any(|v| v[1] != 0.0) {
            return Err(LabError::InvalidMap("1D map with a nonzero second component".into()));
        }
        let tol = 1e-9 * domain.diameter();
        Ok(Self {
            domain,
            pieces,
            vectors,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn m(&self) -> usize {
        self.pieces.len()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn vectors(&self) -> &[Point] {
        &self.vectors
    }

    pub fn is_torus(&self) -> bool {
        self.domain.is_torus()
    }

    /// Same partition with different translation vectors.
    pub fn with_vectors(&self, vectors: Vec<Point>) -> Result<Self> {
        Self::new(self.domain.clone(), self.pieces.clone(), vectors)
    }

    /// Piece index without the domain check; `None` if no piece contains `x`.
    #[inline]
    pub fn piece_of(&self, x: Point) -> Option<usize> {
        self.pieces.iter().position(|p| p.contains(x))
    }

    /// Piece of the nearest domain point; total on the plane.
    #[inline]
    pub fn piece_of_nearest(&self, x: Point) -> Option<usize> {
        self.piece_of(x).or_else(|| self.piece_of(self.domain.project(x)))
    }

    pub fn classify(&self, x: Point) -> Result<usize> {
        if !self.domain.contains_with(x, self.tol) {
            return Err(LabError::OutsideDomain(x[..self.dim()].to_vec()));
        }
        self.piece_of(x)
            .ok_or_else(|| LabError::OutsideDomain(x[..self.dim()].to_vec()))
    }

    pub fn step(&self, x: Point) -> Result<Point> {
        let i = self.classify(x)?;
        self.translate(i, x)
    }

    /// `x + v_i`, wrapped on the torus, checked against a flat domain.
    #[inline]
    pub fn translate(&self, i: usize, x: Point) -> Result<Point> {
        let v = self.vectors[i];
        let y = self.domain.wrap([x[0] + v[0], x[1] + v[1]]);
        if !self.domain.is_torus() && !self.domain.contains_with(y, self.tol) {
            return Err(LabError::MapsOutside {
                piece: i,
                point: x[..self.dim()].to_vec(),
            });
        }
        Ok(y)
    }

    /// Length-`k` orbit: its itinerary and visit statistics.
    pub fn orbit(&self, x: Point, k: u64) -> Result<(Itinerary, OrbitStats)> {
        let mut symbols = Vec::with_capacity(k as usize);
        let stats = self.orbit_with(x, k, |i| symbols.push(i as u32))?;
        Ok((Itinerary { symbols }, stats))
    }

    /// Orbit statistics only (no itinerary is stored).
    pub fn orbit_stats(&self, x: Point, k: u64) -> Result<OrbitStats> {
        self.orbit_with(x, k, |_| {})
    }

    fn orbit_with(&self, x0: Point, k: u64, mut visit: impl FnMut(usize)) -> Result<OrbitStats> {
        let mut counts = vec![0u64; self.m()];
        let mut x = x0;
        for _ in 0..k {
            let i = self.classify(x)?;
            counts[i] += 1;
            visit(i);
            x = self.translate(i, x)?;
        }
        let reconstruction_error = self.reconstruction_error(x0, &counts, x);
        Ok(OrbitStats {
            k,
            visit_counts: counts,
            final_point: x,
            reconstruction_error,
        })
    }

    /// Distance between `F^k x` and `x + sum b_i v_i` (on the torus: modulo `Z^2`).
    pub fn reconstruction_error(&self, x0: Point, counts: &[u64], fx: Point) -> f64 {
        let mut y = x0;
        for (c, v) in counts.iter().zip(&self.vectors) {
            y[0] += *c as f64 * v[0];
            y[1] += *c as f64 * v[1];
        }
        let mut d = [fx[0] - y[0], fx[1] - y[1]];
        if self.is_torus() {
            for c in d.iter_mut() {
                *c -= c.round();
            }
        }
        norm(d, self.dim())
    }

    /// Reconstruction tolerance `10 k eps scale`.
    pub fn reconstruction_tolerance(&self, x0: Point, k: u64) -> f64 {
        let scale = self
            .vectors
            .iter()
            .map(|v| norm(*v, self.dim()))
            .fold(norm(x0, self.dim()).max(self.domain.diameter()), f64::max);
        10.0 * (k.max(1) as f64) * f64::EPSILON * scale
    }

    /// Samples `samples` seeded points of the domain and checks covering,
    /// overlaps and `F(Omega) ⊆ Omega`.
    pub fn validate_sampled(&self, samples: usize, seed: u64) -> MapValidation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.domain.bbox();
        let (mut uncovered, mut overlap, mut escape, mut n) = (0usize, 0usize, 0usize, 0usize);
        while n < samples {
            let x = [
                lo[0] + rng.gen::<f64>() * (hi[0] - lo[0]),
                if self.dim() == 1 {
                    0.0
                } else {
                    lo[1] + rng.gen::<f64>() * (hi[1] - lo[1])
                },
            ];
            if !self.domain.contains(x) {
                continue;
            }
            n += 1;
            let hits = self.pieces.iter().filter(|p| p.contains(x)).count();
            match hits {
                0 => uncovered += 1,
                1 => {}
                _ => overlap += 1,
            }
            if let Some(i) = self.piece_of(x) {
                if self.translate(i, x).is_err() {
                    escape += 1;
                }
            }
        }
        let f = |c: usize| c as f64 / samples.max(1) as f64;
        MapValidation {
            samples,
            uncovered_fraction: f(uncovered),
            overlap_fraction: f(overlap),
            escape_fraction: f(escape),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::Primitive;

    pub(crate) fn example_1d() -> PwtMap {
        PwtMap::new(
            Domain::Interval { lo: 0.0, hi: 1.0 },
            vec![
                Piece::new(vec![Primitive::Interval {
                    lo: 0.0,
                    hi: 0.6,
                    hi_closed: false,
                }])
                .unwrap(),
                Piece::new(vec![Primitive::Interval {
                    lo: 0.6,
                    hi: 1.0,
                    hi_closed: true,
                }])
                .unwrap(),
            ],
            vec![[0.3, 0.0], [-0.6, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn classify_examples() {
        let m = example_1d();
        assert_eq!(m.classify([0.6, 0.0]).unwrap(), 1);
        assert_eq!(m.classify([0.25, 0.0]).unwrap(), 0);
        assert!(matches!(m.classify([1.5, 0.0]), Err(LabError::OutsideDomain(_))));
    }

    #[test]
    fn step_examples() {
        let m = example_1d();
        assert_eq!(m.step([0.0, 0.0]).unwrap(), [0.3, 0.0]);
        assert_eq!(m.step([0.6, 0.0]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn torus_step_wraps() {
        let m = PwtMap::new(
            Domain::TorusSquare,
            vec![
                Piece::new(vec![Primitive::TorusRect {
                    corner: [0.0, 0.0],
                    size: [0.25, 0.25],
                }])
                .unwrap(),
                Piece::new(vec![Primitive::TorusRect {
                    corner: [0.0, 0.0],
                    size: [1.0, 1.0],
                }])
                .unwrap(),
            ],
            vec![[0.1, 0.1], [0.7, 0.2]],
        )
        .unwrap();
        let y = m.step([0.5, 0.9]).unwrap();
        assert!((y[0] - 0.2).abs() < 1e-12 && (y[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn orbit_example() {
        let m = example_1d();
        let (it, st) = m.orbit([0.0, 0.0], 6).unwrap();
        assert_eq!(it.symbols, vec![0, 0, 1, 0, 0, 1]);
        assert_eq!(st.visit_counts, vec![4, 2]);
        assert!(st.final_point[0].abs() < 1e-15);
        assert!(st.reconstruction_error < 1e-15);
        let (it0, st0) = m.orbit([0.4, 0.0], 0).unwrap();
        assert!(it0.is_empty());
        assert_eq!(st0.visit_counts, vec![0, 0]);
        assert_eq!(st0.final_point, [0.4, 0.0]);
    }

    #[test]
    fn escaping_map_is_flagged() {
        let m = example_1d().with_vectors(vec![[0.5, 0.0], [-0.6, 0.0]]).unwrap();
        assert!(matches!(m.step([0.55, 0.0]), Err(LabError::MapsOutside { piece: 0, .. })));
        let v = m.validate_sampled(2000, 3);
        assert!(v.escape_fraction > 0.0);
        assert!(example_1d().validate_sampled(2000, 3).is_valid(0.0));
    }
}
