//! Invariants of a stabilized attractor: piece measures, covering number, tiling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::iterate::CellMap;
use crate::error::Result;
use crate::geometry::{ArcUnion, Lattice, OccupancyGrid, Point, Rational, Scalar};
use crate::pwt::{alpha_coefficients, IntervalMap, PwtMap};

/// Largest distance of `Leb A / Leb T` from an integer for `ell` to count as resolved.
pub const ELL_TOLERANCE: f64 = 0.05;

/// Read-only view of an attractor approximation.
pub trait SetRep {
    fn dim(&self) -> usize;
    fn contains(&self, x: Point) -> bool;
    /// Whether `x` is within the resolution band of the boundary.
    fn near_boundary(&self, x: Point) -> bool;
    fn bbox(&self) -> Option<(Point, Point)>;
    fn lebesgue(&self) -> f64;
}

impl SetRep for OccupancyGrid {
    fn dim(&self) -> usize {
        OccupancyGrid::dim(self)
    }

    fn contains(&self, x: Point) -> bool {
        self.contains_point(x)
    }

    fn near_boundary(&self, x: Point) -> bool {
        OccupancyGrid::near_boundary(self, x, 2)
    }

    fn bbox(&self) -> Option<(Point, Point)> {
        self.occupied_bbox()
    }

    fn lebesgue(&self) -> f64 {
        self.measure()
    }
}

/// Exact interval unions on the line; the boundary band is `1e-9`.
impl SetRep for ArcUnion<Rational> {
    fn dim(&self) -> usize {
        1
    }

    fn contains(&self, x: Point) -> bool {
        self.arcs().iter().any(|&(a, b)| a.to_f64() <= x[0] && x[0] < b.to_f64())
    }

    fn near_boundary(&self, x: Point) -> bool {
        self.map_scalar(|r| r.to_f64()).boundary_distance(x[0]) < 1e-9
    }

    fn bbox(&self) -> Option<(Point, Point)> {
        let a = self.arcs();
        Some(([a.first()?.0.to_f64(), 0.0], [a.last()?.1.to_f64(), 0.0]))
    }

    fn lebesgue(&self) -> f64 {
        self.measure().to_f64()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PieceMeasure {
    pub piece: usize,
    pub measure: f64,
    pub normalized: f64,
}

/// `A_i = A ∩ P_i` by cell counting, each cell assigned the piece of its center.
pub fn attractor_pieces_raster(cell_map: &CellMap, a: &OccupancyGrid, m: usize) -> Vec<PieceMeasure> {
    let mut counts = vec![0usize; m];
    for idx in a.occupied_indices() {
        if let Some(i) = cell_map.piece(idx) {
            counts[i] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    counts
        .iter()
        .enumerate()
        .map(|(piece, &c)| PieceMeasure {
            piece,
            measure: c as f64 * a.cell_volume(),
            normalized: c as f64 / total.max(1) as f64,
        })
        .collect()
}

/// Exact `A_i = A ∩ P_i` on the line.
pub fn attractor_pieces_exact(map: &IntervalMap, a: &ArcUnion<Rational>) -> Vec<(ArcUnion<Rational>, Rational)> {
    (0..map.m())
        .map(|i| {
            let part = a.intersect(&map.piece(i));
            let mu = part.measure();
            (part, mu)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    /// Fiber count -> number of probes.
    pub xi_histogram: BTreeMap<usize, usize>,
    pub probes_used: usize,
    pub probes_excluded: usize,
    pub mode: Option<usize>,
    /// Fraction of used probes at the mode.
    pub mode_fraction: f64,
    /// `Leb A / Leb T`.
    pub volume_ratio: f64,
    /// `round(volume_ratio)` when within [`ELL_TOLERANCE`]; `None` means unresolved.
    pub ell: Option<u64>,
}

/// Lattice translates `lambda` with `x + lambda` inside the box `[lo, hi]`.
fn translates_in_bbox(bbox: Option<(Point, Point)>, lattice: &Lattice, x: Point) -> Vec<([i64; 2], Point)> {
    let Some((lo, hi)) = bbox else {
        return Vec::new();
    };
    let dim = lattice.dim();
    let corners: Vec<Point> = if dim == 1 {
        vec![lo, hi]
    } else {
        vec![lo, hi, [lo[0], hi[1]], [hi[0], lo[1]]]
    };
    let mut cmin = [f64::INFINITY; 2];
    let mut cmax = [f64::NEG_INFINITY; 2];
    for c in corners {
        let k = lattice.coords([c[0] - x[0], c[1] - x[1]]);
        for j in 0..dim {
            cmin[j] = cmin[j].min(k[j]);
            cmax[j] = cmax[j].max(k[j]);
        }
    }
    let range = |j: usize| -> std::ops::RangeInclusive<i64> {
        if j < dim {
            (cmin[j].floor() as i64)..=(cmax[j].ceil() as i64)
        } else {
            0..=0
        }
    };
    let mut out = Vec::new();
    for k0 in range(0) {
        for k1 in range(1) {
            let l = lattice.vector([k0, k1]);
            let y = [x[0] + l[0], x[1] + l[1]];
            let inside_box = y[0] >= lo[0] && y[0] <= hi[0] && (dim == 1 || (y[1] >= lo[1] && y[1] <= hi[1]));
            if inside_box {
                out.push(([k0, k1], y));
            }
        }
    }
    out
}

/// Fiber count `#(pi^{-1}(phi) ∩ A)`, or `None` when a candidate sits in the boundary band.
pub fn fiber_count(a: &dyn SetRep, lattice: &Lattice, phi: Point) -> Option<usize> {
    fiber_count_in(a, a.bbox(), lattice, phi)
}

fn fiber_count_in(a: &dyn SetRep, bbox: Option<(Point, Point)>, lattice: &Lattice, phi: Point) -> Option<usize> {
    let mut count = 0;
    for (_, y) in translates_in_bbox(bbox, lattice, phi) {
        if a.near_boundary(y) {
            return None;
        }
        if a.contains(y) {
            count += 1;
        }
    }
    Some(count)
}

/// Histogram of fiber counts over `n_probes` seeded torus points, and the volume ratio.
pub fn covering_number(a: &dyn SetRep, lattice: &Lattice, n_probes: usize, seed: u64) -> CoveringReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bbox = a.bbox();
    let mut xi_histogram = BTreeMap::new();
    let mut excluded = 0;
    for _ in 0..n_probes {
        let c = [rng.gen::<f64>(), if lattice.dim() == 2 { rng.gen::<f64>() } else { 0.0 }];
        let phi = lattice.from_coords(c);
        match fiber_count_in(a, bbox, lattice, phi) {
            Some(n) => *xi_histogram.entry(n).or_insert(0) += 1,
            None => excluded += 1,
        }
    }
    let used = n_probes - excluded;
    let mode = xi_histogram.iter().max_by_key(|(k, v)| (**v, std::cmp::Reverse(**k))).map(|(k, _)| *k);
    let mode_fraction = mode.map_or(0.0, |k| xi_histogram[&k] as f64 / used.max(1) as f64);
    let volume_ratio = a.lebesgue() / lattice.det_abs();
    CoveringReport {
        xi_histogram,
        probes_used: used,
        probes_excluded: excluded,
        mode,
        mode_fraction,
        volume_ratio,
        ell: resolve_ell(volume_ratio),
    }
}

pub fn resolve_ell(ratio: f64) -> Option<u64> {
    let r = ratio.round();
    ((ratio - r).abs() < ELL_TOLERANCE && r >= 1.0).then_some(r as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TilingReport {
    pub samples: usize,
    /// Fraction of the window covered by `A + L`.
    pub coverage: f64,
    /// Fraction covered at least twice.
    pub overlap: f64,
}

/// Covers a window of `window x window` fundamental domains (centered on the
/// attractor) with `A + L`, sampling `per_side` points per domain side.
pub fn tiling_check(a: &dyn SetRep, lattice: &Lattice, window: usize, per_side: usize) -> TilingReport {
    let dim = lattice.dim();
    let bbox = a.bbox();
    let center = bbox.map_or([0.0, 0.0], |(lo, hi)| [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0]);
    let c0 = lattice.coords(center);
    let n = window * per_side;
    let half = window as f64 / 2.0;
    let (mut covered, mut overlapped, mut total) = (0usize, 0usize, 0usize);
    let ny = if dim == 2 { n } else { 1 };
    for j in 0..ny {
        for i in 0..n {
            let s = c0[0] - half + (i as f64 + 0.5) / per_side as f64;
            let t = if dim == 2 { c0[1] - half + (j as f64 + 0.5) / per_side as f64 } else { 0.0 };
            let y = lattice.from_coords([s, t]);
            // count lambda with y - lambda in A, i.e. the fiber count of y
            let count = translates_in_bbox(bbox, lattice, y)
                .into_iter()
                .filter(|(_, p)| a.contains(*p))
                .count();
            total += 1;
            if count >= 1 {
                covered += 1;
            }
            if count >= 2 {
                overlapped += 1;
            }
        }
    }
    TilingReport {
        samples: total,
        coverage: covered as f64 / total.max(1) as f64,
        overlap: overlapped as f64 / total.max(1) as f64,
    }
}

/// `D(x)`: lattice coordinates `k` with `|k|_inf <= radius` and `x + lambda_k ∈ A`.
pub fn diagram(x: Point, a: &dyn SetRep, lattice: &Lattice, radius: i64) -> Vec<[i64; 2]> {
    let r1 = if lattice.dim() == 2 { radius } else { 0 };
    let mut out = Vec::new();
    for k0 in -radius..=radius {
        for k1 in -r1..=r1 {
            let l = lattice.vector([k0, k1]);
            if a.contains([x[0] + l[0], x[1] + l[1]]) {
                out.push([k0, k1]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisitFrequencyReport {
    pub k: u64,
    pub frequencies: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `max_i |b_i / k - alpha_i|`.
    pub deviation: f64,
}

pub fn visit_frequency_report(map: &PwtMap, x: Point, k: u64) -> Result<VisitFrequencyReport> {
    let alpha = alpha_coefficients(map.dim(), map.vectors())?;
    let stats = map.orbit_stats(x, k)?;
    let frequencies: Vec<f64> = stats.visit_counts.iter().map(|&c| c as f64 / k.max(1) as f64).collect();
    let deviation = frequencies
        .iter()
        .zip(&alpha.alphas)
        .map(|(f, a)| (f - a).abs())
        .fold(0.0, f64::max);
    Ok(VisitFrequencyReport {
        k,
        frequencies,
        alphas: alpha.alphas,
        deviation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttractorReport {
    pub stabilized_at: Option<usize>,
    pub h: Option<f64>,
    pub measure: f64,
    pub pieces: Vec<PieceMeasure>,
    pub torus_volume: Option<f64>,
    pub covering: Option<CoveringReport>,
    pub tiling: Option<TilingReport>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{lattice_from_vectors, rat};

    fn line_attractor() -> (ArcUnion<Rational>, Lattice) {
        let a = ArcUnion::interval(rat(0, 1), rat(9, 10));
        let l = lattice_from_vectors(1, &[[0.3, 0.0], [-0.6, 0.0]]).unwrap();
        (a, l)
    }

    #[test]
    fn line_example_pieces() {
        let m = IntervalMap::new(rat(0, 1), rat(1, 1), vec![rat(3, 5)], vec![rat(3, 10), rat(-3, 5)]).unwrap();
        let (a, _) = line_attractor();
        let p = attractor_pieces_exact(&m, &a);
        assert_eq!(p[0].0, ArcUnion::interval(rat(0, 1), rat(3, 5)));
        assert_eq!(p[1].0, ArcUnion::interval(rat(3, 5), rat(9, 10)));
        assert_eq!(p[0].1 / a.measure(), rat(2, 3));
        assert_eq!(p[1].1 / a.measure(), rat(1, 3));
    }

    #[test]
    fn line_example_covering_and_tiling() {
        let (a, l) = line_attractor();
        let c = covering_number(&a, &l, 2000, 7);
        assert_eq!(c.xi_histogram.keys().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(c.ell, Some(1));
        assert!((c.volume_ratio - 1.0).abs() < 1e-12);
        let t = tiling_check(&a, &l, 3, 1000);
        assert_eq!(t.coverage, 1.0);
        assert_eq!(t.overlap, 0.0);
        assert_eq!(diagram([0.45, 0.0], &a, &l, 3), vec![[0, 0]]);
    }

    #[test]
    fn doubled_set_has_two_sheets() {
        let (a, l) = line_attractor();
        let doubled = a.union(&a.translate(rat(18, 10)));
        let c = covering_number(&doubled, &l, 1000, 3);
        assert_eq!(c.mode, Some(2));
        assert_eq!(c.mode_fraction, 1.0);
        assert_eq!(c.ell, Some(2));
        let d = diagram([0.45, 0.0], &doubled, &l, 3);
        assert_eq!(d, vec![[-2, 0], [0, 0]]);
    }

    #[test]
    fn boundary_probe_excluded() {
        let (a, l) = line_attractor();
        assert_eq!(fiber_count(&a, &l, [0.9, 0.0]), None);
        assert_eq!(fiber_count(&a, &l, [0.5, 0.0]), Some(1));
    }

    #[test]
    fn square_tiles_and_hole_is_seen() {
        let l = Lattice::from_basis(2, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let mut g = OccupancyGrid::new([0.0, 0.0], 1.0 / 16.0, 16, 16, false);
        g.cells_mut().iter_mut().for_each(|c| *c = true);
        let t = tiling_check(&g, &l, 3, 64);
        assert_eq!((t.coverage, t.overlap), (1.0, 0.0));
        g.set(g.index(5, 7), false);
        let t = tiling_check(&g, &l, 3, 64);
        assert!(t.coverage < 1.0 && t.coverage > 0.99);
        assert_eq!(t.overlap, 0.0);
    }

    #[test]
    fn frequencies_on_line_example() {
        let m = IntervalMap::new(rat(0, 1), rat(1, 1), vec![rat(3, 5)], vec![rat(3, 10), rat(-3, 5)])
            .unwrap()
            .to_pwt_map();
        let r = visit_frequency_report(&m, [0.0, 0.0], 6).unwrap();
        assert!(r.deviation < 1e-12);
        let r1 = visit_frequency_report(&m, [0.0, 0.0], 1).unwrap();
        assert_eq!(r1.frequencies, vec![1.0, 0.0]);
    }
}
