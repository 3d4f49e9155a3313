//! Finite unions of half-open intervals `[a, b)`, on a line or on the circle `R/Z`.
//!
//! The same container serves both settings. On the circle every arc is kept
//! inside `[0, 1)`; an arc crossing `0` is stored as two pieces `[a, 1)` and
//! `[0, b)`, which are deliberately not merged.

use serde::Serialize;

use super::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcUnion<S> {
    arcs: Vec<(S, S)>,
    measure: S,
}

impl<S: Scalar> Default for ArcUnion<S> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<S: Scalar> ArcUnion<S> {
    pub fn empty() -> Self {
        Self {
            arcs: Vec::new(),
            measure: S::zero(),
        }
    }

    /// `[0, 1)`.
    pub fn full_circle() -> Self {
        Self::interval(S::zero(), S::one())
    }

    pub fn interval(a: S, b: S) -> Self {
        Self::new(vec![(a, b)])
    }

    /// Arc of length `len` starting at `start` on the circle, split at `0` when needed.
    pub fn arc_mod1(start: S, len: S) -> Self {
        let mut out = Vec::with_capacity(2);
        push_arc_mod1(&mut out, start, len);
        Self::new(out)
    }

    /// Builds a normalized union: sorted, disjoint, adjacent pieces merged, empties dropped.
    pub fn new(mut arcs: Vec<(S, S)>) -> Self {
        arcs.retain(|(a, b)| a < b);
        arcs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("NaN endpoint"));
        let mut merged: Vec<(S, S)> = Vec::with_capacity(arcs.len());
        for (a, b) in arcs {
            match merged.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        let measure = merged
            .iter()
            .fold(S::zero(), |acc, &(a, b)| acc + (b - a));
        Self {
            arcs: merged,
            measure,
        }
    }

    pub fn arcs(&self) -> &[(S, S)] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measure(&self) -> S {
        self.measure
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = Vec::with_capacity(self.arcs.len() + other.arcs.len());
        all.extend_from_slice(&self.arcs);
        all.extend_from_slice(&other.arcs);
        Self::new(all)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.arcs.len() && j < other.arcs.len() {
            let (a0, a1) = self.arcs[i];
            let (b0, b1) = other.arcs[j];
            let lo = a0.max_of(b0);
            let hi = a1.min_of(b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::new(out)
    }

    /// `self \ other`.
    pub fn difference(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let mut j = 0;
        for &(a, b) in &self.arcs {
            let mut start = a;
            while j < other.arcs.len() && other.arcs[j].1 <= start {
                j += 1;
            }
            let mut k = j;
            while k < other.arcs.len() && other.arcs[k].0 < b {
                let (c0, c1) = other.arcs[k];
                if c0 > start {
                    out.push((start, c0));
                }
                if c1 > start {
                    start = c1;
                }
                if start >= b {
                    break;
                }
                k += 1;
            }
            if start < b {
                out.push((start, b));
            }
        }
        Self::new(out)
    }

    /// `self ⊇ other`.
    pub fn contains(&self, other: &Self) -> bool {
        other.difference(self).is_empty()
    }

    pub fn contains_point(&self, x: S) -> bool {
        let idx = self.arcs.partition_point(|&(a, _)| a <= x);
        idx > 0 && x < self.arcs[idx - 1].1
    }

    /// `self ∩ [lo, hi)`.
    pub fn restrict(&self, lo: S, hi: S) -> Self {
        self.intersect(&Self::interval(lo, hi))
    }

    /// Translation on the line.
    pub fn translate(&self, t: S) -> Self {
        Self {
            arcs: self.arcs.iter().map(|&(a, b)| (a + t, b + t)).collect(),
            measure: self.measure,
        }
    }

    /// Rotation of the circle by `t`; arcs must lie in `[0, 1)`.
    pub fn translate_mod1(&self, t: S) -> Self {
        let mut out = Vec::with_capacity(self.arcs.len() + 1);
        for &(a, b) in &self.arcs {
            push_arc_mod1(&mut out, a + t, b - a);
        }
        Self::new(out)
    }

    /// Distance from `x` to the nearest endpoint (`+inf` for the empty set).
    pub fn boundary_distance(&self, x: f64) -> f64 {
        self.arcs
            .iter()
            .flat_map(|&(a, b)| [a.to_f64(), b.to_f64()])
            .map(|e| (e - x).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest complementary gap on the circle as `(start, length)`.
    /// The empty set has the whole circle as its gap.
    pub fn largest_gap_mod1(&self) -> (S, S) {
        if self.arcs.is_empty() {
            return (S::zero(), S::one());
        }
        let n = self.arcs.len();
        let mut best = (S::zero(), S::zero());
        for i in 0..n {
            let end = self.arcs[i].1;
            let next_start = if i + 1 < n {
                self.arcs[i + 1].0
            } else {
                self.arcs[0].0 + S::one()
            };
            let gap = next_start - end;
            if gap > best.1 {
                best = (end.frac(), gap);
            }
        }
        best
    }

    /// Shortest arc `(start, length)` on the circle that contains the whole set.
    pub fn hull_mod1(&self) -> (S, S) {
        let (gap_start, gap_len) = self.largest_gap_mod1();
        ((gap_start + gap_len).frac(), S::one() - gap_len)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(S) -> T) -> ArcUnion<T> {
        ArcUnion::new(self.arcs.iter().map(|&(a, b)| (f(a), f(b))).collect())
    }
}

fn push_arc_mod1<S: Scalar>(out: &mut Vec<(S, S)>, start: S, len: S) {
    if len <= S::zero() {
        return;
    }
    if len >= S::one() {
        out.push((S::zero(), S::one()));
        return;
    }
    let a = start.frac();
    let end = a + len;
    if end <= S::one() {
        out.push((a, end));
    } else {
        out.push((a, S::one()));
        out.push((S::zero(), end - S::one()));
    }
}
