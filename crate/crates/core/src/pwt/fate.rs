//! Periodicity of finite fate prefixes and the integer relations they imply.

use serde::Serialize;

use super::map::Itinerary;
use crate::error::{LabError, Result};
use crate::geometry::{norm, Point, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FateVerdict {
    Aperiodic,
    /// The itinerary is `period`-periodic from index `transient` on.
    /// `counts[i]` is the number of visits to piece `i` in one period.
    Periodic {
        period: usize,
        transient: usize,
        counts: Vec<u64>,
    },
}

impl FateVerdict {
    pub fn period(&self) -> Option<usize> {
        match self {
            FateVerdict::Periodic { period, .. } => Some(*period),
            FateVerdict::Aperiodic => None,
        }
    }

    /// Per-period visit counts, i.e. the rational-dependence witness.
    pub fn witness(&self) -> Option<&[u64]> {
        match self {
            FateVerdict::Periodic { counts, .. } => Some(counts),
            FateVerdict::Aperiodic => None,
        }
    }
}

/// Observed periods required in the periodic tail. Sturmian codings of golden
/// rotations contain factors of exponent `2 + phi ≈ 3.62`, so three is not enough.
pub const MIN_PERIODS: usize = 4;

/// Smallest period `p` such that a tail of the itinerary is `p`-periodic, the
/// tail covering at least [`MIN_PERIODS`] periods and at least half of the itinerary.
pub fn detect_periodic_fate(itinerary: &Itinerary) -> Result<FateVerdict> {
    let s = &itinerary.symbols;
    let k = s.len();
    if k < 6 {
        return Err(LabError::TooShort(k));
    }
    let min_tail = k.div_ceil(2);
    for p in 1..=k / MIN_PERIODS {
        let needed = min_tail.max(MIN_PERIODS * p);
        // scan backwards for the last mismatch s[i] != s[i + p]
        let mut i = k - p;
        let mut ok = true;
        while i > 0 {
            i -= 1;
            if s[i] != s[i + p] {
                ok = k - (i + 1) >= needed;
                i += 1;
                break;
            }
        }
        if ok && k - i >= needed {
            let transient = i;
            let m = s.iter().copied().max().unwrap_or(0) as usize + 1;
            let mut counts = vec![0u64; m];
            for &sym in &s[transient..transient + p] {
                counts[sym as usize] += 1;
            }
            return Ok(FateVerdict::Periodic {
                period: p,
                transient,
                counts,
            });
        }
    }
    Ok(FateVerdict::Aperiodic)
}

/// `|sum m_i v_i|` for a periodic fate's counts.
pub fn witness_residual(dim: usize, counts: &[u64], vectors: &[Point]) -> f64 {
    let mut s = [0.0; 2];
    for (c, v) in counts.iter().zip(vectors) {
        s[0] += *c as f64 * v[0];
        s[1] += *c as f64 * v[1];
    }
    norm(s, dim)
}

/// `sum m_i v_i` computed exactly.
pub fn witness_sum_exact(counts: &[u64], vectors: &[Rational]) -> Rational {
    counts
        .iter()
        .zip(vectors)
        .fold(Rational::from_integer(0), |acc, (c, v)| acc + *v * Rational::from_integer(*c as i128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;
    use crate::pwt::exact::IntervalMap;

    fn it(v: Vec<u32>) -> Itinerary {
        Itinerary { symbols: v }
    }

    #[test]
    fn period_three_with_witness() {
        let s: Vec<u32> = (0..30).map(|i| if i % 3 == 2 { 1 } else { 0 }).collect();
        let v = detect_periodic_fate(&it(s)).unwrap();
        assert_eq!(v.period(), Some(3));
        assert_eq!(v.witness().unwrap(), &[2, 1]);
        assert!(witness_residual(1, &[2, 1], &[[0.3, 0.0], [-0.6, 0.0]]) < 1e-15);
        assert_eq!(witness_sum_exact(&[2, 1], &[rat(3, 10), rat(-3, 5)]), rat(0, 1));
    }

    #[test]
    fn constant_is_period_one() {
        let v = detect_periodic_fate(&it(vec![0; 30])).unwrap();
        assert_eq!(v.period(), Some(1));
    }

    #[test]
    fn golden_rotation_is_aperiodic() {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let m = crate::pwt::PwtMap::new(
            crate::geometry::Domain::Interval { lo: 0.0, hi: 1.0 },
            vec![
                crate::geometry::Piece::new(vec![crate::geometry::Primitive::Interval {
                    lo: 0.0,
                    hi: 1.0 - g,
                    hi_closed: false,
                }])
                .unwrap(),
                crate::geometry::Piece::new(vec![crate::geometry::Primitive::Interval {
                    lo: 1.0 - g,
                    hi: 1.0,
                    hi_closed: false,
                }])
                .unwrap(),
            ],
            vec![[g, 0.0], [g - 1.0, 0.0]],
        )
        .unwrap();
        let (itin, _) = m.orbit([0.1, 0.0], 1000).unwrap();
        assert_eq!(detect_periodic_fate(&itin).unwrap(), FateVerdict::Aperiodic);
    }

    #[test]
    fn short_itinerary_rejected() {
        assert_eq!(detect_periodic_fate(&it(vec![0; 5])), Err(LabError::TooShort(5)));
    }

    #[test]
    fn eventually_periodic_orbit_detected() {
        // x = 0.95 is outside the attractor [0, 0.9) and enters it after one step
        let m = IntervalMap::new(rat(0, 1), rat(1, 1), vec![rat(3, 5)], vec![rat(3, 10), rat(-3, 5)]).unwrap();
        let (itin, _) = m.orbit(rat(19, 20), 60).unwrap();
        let v = detect_periodic_fate(&itin).unwrap();
        assert_eq!(v.period(), Some(3));
        assert_eq!(witness_sum_exact(v.witness().unwrap(), m.vectors()), rat(0, 1));
    }
}
