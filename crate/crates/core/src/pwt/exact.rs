//! Exact one-dimensional piecewise translations with rational data.

use serde::Serialize;

use super::map::{Itinerary, PwtMap};
use crate::error::{LabError, Result};
use crate::geometry::{format_rational, ArcUnion, Domain, Piece, Primitive, Rational, Scalar};

/// Map on `[lo, hi)` with pieces `[c_i, c_{i+1})`, `c_0 = lo`, `c_m = hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMap {
    bounds: Vec<Rational>,
    vectors: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactOrbitStats {
    pub k: u64,
    pub visit_counts: Vec<u64>,
    #[serde(serialize_with = "ser_rational")]
    pub final_point: Rational,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

impl IntervalMap {
    /// `cuts` are the interior breakpoints; there are `cuts.len() + 1` pieces.
    pub fn new(lo: Rational, hi: Rational, cuts: Vec<Rational>, vectors: Vec<Rational>) -> Result<Self> {
        let mut bounds = Vec::with_capacity(cuts.len() + 2);
        bounds.push(lo);
        bounds.extend(cuts);
        bounds.push(hi);
        if bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::InvalidMap("breakpoints must be strictly increasing inside the domain".into()));
        }
        if vectors.len() != bounds.len() - 1 {
            return Err(LabError::InvalidMap(format!(
                "{} pieces but {} translation vectors",
                bounds.len() - 1,
                vectors.len()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            let (a, b) = (bounds[i] + v, bounds[i + 1] + v);
            if a < lo || b > hi {
                return Err(LabError::MapsOutside {
                    piece: i,
                    point: vec![bounds[i].to_f64()],
                });
            }
        }
        Ok(Self { bounds, vectors })
    }

    pub fn m(&self) -> usize {
        self.vectors.len()
    }

    pub fn lo(&self) -> Rational {
        self.bounds[0]
    }

    pub fn hi(&self) -> Rational {
        *self.bounds.last().expect("nonempty")
    }

    pub fn vectors(&self) -> &[Rational] {
        &self.vectors
    }

    pub fn bounds(&self) -> &[Rational] {
        &self.bounds
    }

    pub fn piece(&self, i: usize) -> ArcUnion<Rational> {
        ArcUnion::interval(self.bounds[i], self.bounds[i + 1])
    }

    pub fn domain_set(&self) -> ArcUnion<Rational> {
        ArcUnion::interval(self.lo(), self.hi())
    }

    pub fn classify(&self, x: Rational) -> Result<usize> {
        if x < self.lo() || x >= self.hi() {
            return Err(LabError::OutsideDomain(vec![x.to_f64()]));
        }
        Ok(self.bounds.partition_point(|b| *b <= x) - 1)
    }

    pub fn step(&self, x: Rational) -> Result<Rational> {
        Ok(x + self.vectors[self.classify(x)?])
    }

    pub fn orbit(&self, x0: Rational, k: u64) -> Result<(Itinerary, ExactOrbitStats)> {
        let mut counts = vec![0u64; self.m()];
        let mut symbols = Vec::with_capacity(k as usize);
        let mut x = x0;
        for _ in 0..k {
            let i = self.classify(x)?;
            counts[i] += 1;
            symbols.push(i as u32);
            x += self.vectors[i];
        }
        Ok((
            Itinerary { symbols },
            ExactOrbitStats {
                k,
                visit_counts: counts,
                final_point: x,
            },
        ))
    }

    /// `F(S) = ∪_i (S ∩ P_i) + v_i`.
    pub fn image(&self, set: &ArcUnion<Rational>) -> ArcUnion<Rational> {
        let mut arcs = Vec::with_capacity(set.len() + self.m());
        for i in 0..self.m() {
            let part = set.restrict(self.bounds[i], self.bounds[i + 1]);
            arcs.extend(part.translate(self.vectors[i]).arcs().iter().copied());
        }
        ArcUnion::new(arcs)
    }

    /// Floating-point version of the same map.
    pub fn to_pwt_map(&self) -> PwtMap {
        let m = self.m();
        let pieces = (0..m)
            .map(|i| {
                Piece::new(vec![Primitive::Interval {
                    lo: self.bounds[i].to_f64(),
                    hi: self.bounds[i + 1].to_f64(),
                    hi_closed: false,
                }])
                .expect("increasing bounds")
            })
            .collect();
        PwtMap::new(
            Domain::Interval {
                lo: self.lo().to_f64(),
                hi: self.hi().to_f64(),
            },
            pieces,
            self.vectors.iter().map(|v| [v.to_f64(), 0.0]).collect(),
        )
        .expect("validated exactly")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    pub(crate) fn example() -> IntervalMap {
        IntervalMap::new(rat(0, 1), rat(1, 1), vec![rat(3, 5)], vec![rat(3, 10), rat(-3, 5)]).unwrap()
    }

    #[test]
    fn exact_orbit_example() {
        let (it, st) = example().orbit(rat(0, 1), 6).unwrap();
        assert_eq!(it.symbols, vec![0, 0, 1, 0, 0, 1]);
        assert_eq!(st.visit_counts, vec![4, 2]);
        assert_eq!(st.final_point, rat(0, 1));
        let recon = rat(0, 1) + rat(3, 10) * rat(4, 1) + rat(-3, 5) * rat(2, 1);
        assert_eq!(recon, st.final_point);
    }

    #[test]
    fn classify_half_open() {
        let m = example();
        assert_eq!(m.classify(rat(3, 5)).unwrap(), 1);
        assert_eq!(m.classify(rat(1, 4)).unwrap(), 0);
        assert!(m.classify(rat(3, 2)).is_err());
    }

    #[test]
    fn image_of_domain() {
        let m = example();
        let img = m.image(&m.domain_set());
        assert_eq!(img.arcs(), &[(rat(0, 1), rat(9, 10))]);
    }

    #[test]
    fn invalid_maps_rejected() {
        assert!(IntervalMap::new(rat(0, 1), rat(1, 1), vec![rat(3, 5)], vec![rat(1, 2), rat(-3, 5)]).is_err());
        assert!(IntervalMap::new(rat(0, 1), rat(1, 1), vec![rat(3, 2)], vec![rat(0, 1), rat(0, 1)]).is_err());
    }
}
