//! Valid maps by construction: sector partitions of the unit disk and
//! interval maps with rational data.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::alpha::alpha_coefficients;
use super::exact::IntervalMap;
use super::map::PwtMap;
use super::relation::{rational_independence_check, IndependenceVerdict};
use crate::error::{LabError, Result};
use crate::geometry::{Domain, Piece, Point, Primitive, Rational};

/// Coefficient bound used when sampling rationally independent vectors.
pub const SAMPLE_INDEPENDENCE_BOUND: u64 = 1000;

fn unit(a: f64) -> Point {
    [a.cos(), a.sin()]
}

fn norm2(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

/// Point where the ray `apex + s * e`, `s >= 0`, leaves the unit disk.
fn ray_exit(apex: Point, e: Point) -> Point {
    let b = apex[0] * e[0] + apex[1] * e[1];
    let s = -b + (b * b - norm2(apex) + 1.0).sqrt();
    [apex[0] + s * e[0], apex[1] + s * e[1]]
}

/// Counterclockwise angle from `from` to `to` in `[0, 2 pi)`.
fn ccw(from: f64, to: f64) -> f64 {
    (to - from).rem_euclid(TAU)
}

/// Whether the convex sector piece `{apex + s e(t) : a <= t <= b} ∩ D`, shifted by `v`,
/// stays in the closed unit disk `D`.
fn sector_shift_fits(apex: Point, a: f64, b: f64, v: Point) -> bool {
    let inside = |p: Point| norm2([p[0] + v[0], p[1] + v[1]]) <= 1.0 - 1e-12;
    let qa = ray_exit(apex, unit(a));
    let qb = ray_exit(apex, unit(b));
    if !(inside(apex) && inside(qa) && inside(qb)) {
        return false;
    }
    // on the arc, |x + v| <= 1 iff <x, v> <= -|v|^2 / 2; the maximum of <x, v>
    // is |v| when the direction of v lies on the arc, else at an endpoint
    let (pa, pb) = (qa[1].atan2(qa[0]), qb[1].atan2(qb[0]));
    let pv = v[1].atan2(v[0]);
    ccw(pa, pv) > ccw(pa, pb)
}

/// Three sectors of the unit disk around `apex`; piece `i` spans the
/// counterclockwise angles from `rays[i]` to `rays[i + 1]`.
pub fn sector_disk_map(apex: Point, rays: [f64; 3], vectors: [Point; 3]) -> Result<PwtMap> {
    if norm2(apex) >= 1.0 {
        return Err(LabError::BadRegionSpec(format!("apex {apex:?} is outside the unit disk")));
    }
    let mut pieces = Vec::with_capacity(3);
    for i in 0..3 {
        let (a, b) = (rays[i], rays[(i + 1) % 3]);
        let span = ccw(a, b);
        if !(span > 0.0 && span < PI) {
            return Err(LabError::BadRegionSpec(format!("sector {i} spans {span} rad; need (0, pi)")));
        }
        let n1 = [a.sin(), -a.cos()];
        let n2 = [-b.sin(), b.cos()];
        let dot = |n: Point| n[0] * apex[0] + n[1] * apex[1];
        pieces.push(Piece::new(vec![
            Primitive::HalfPlane { normal: n1, offset: dot(n1) },
            Primitive::HalfPlane { normal: n2, offset: dot(n2) },
            Primitive::Disk { center: [0.0, 0.0], radius: 1.0 },
        ])?);
        if !sector_shift_fits(apex, a, b, vectors[i]) {
            return Err(LabError::MapsOutside {
                piece: i,
                point: vectors[i].to_vec(),
            });
        }
    }
    PwtMap::new(
        Domain::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        },
        pieces,
        vectors.to_vec(),
    )
}

/// Random valid 3-branch map of the unit disk with positive alpha
/// coefficients and vectors independent up to [`SAMPLE_INDEPENDENCE_BOUND`].
pub fn random_disk_map<R: Rng>(rng: &mut R) -> PwtMap {
    loop {
        let r = 0.3 * rng.gen::<f64>().sqrt();
        let apex = [r * (TAU * rng.gen::<f64>()).cos(), r * (TAU * rng.gen::<f64>()).sin()];
        let start = TAU * rng.gen::<f64>();
        let g1 = rng.gen_range(0.6..2.8);
        let g2 = rng.gen_range(0.6..2.8);
        if TAU - g1 - g2 < 0.6 || TAU - g1 - g2 > 2.8 {
            continue;
        }
        let rays = [start, start + g1, start + g1 + g2];
        let mut vectors = [[0.0; 2]; 3];
        let mut ok = true;
        for i in 0..3 {
            let mid = rays[i] + 0.5 * ccw(rays[i], rays[(i + 1) % 3]);
            let dir = mid + PI + rng.gen_range(-0.4..0.4);
            let mut len = rng.gen_range(0.2..1.0);
            while !sector_shift_fits(apex, rays[i], rays[(i + 1) % 3], [len * dir.cos(), len * dir.sin()]) {
                len *= 0.9;
                if len < 0.05 {
                    ok = false;
                    break;
                }
            }
            vectors[i] = [len * dir.cos(), len * dir.sin()];
        }
        if !ok || alpha_coefficients(2, &vectors).is_err() {
            continue;
        }
        if matches!(
            rational_independence_check(2, &vectors, SAMPLE_INDEPENDENCE_BOUND),
            IndependenceVerdict::Dependent(_)
        ) {
            continue;
        }
        if let Ok(m) = sector_disk_map(apex, rays, vectors) {
            return m;
        }
    }
}

/// Random valid 2-branch map of `[0, 1)` with float data.
pub fn random_interval_pwt<R: Rng>(rng: &mut R) -> PwtMap {
    loop {
        let c: f64 = rng.gen_range(0.1..0.9);
        let v0 = rng.gen_range(0.0..(1.0 - c));
        let v1 = -rng.gen_range(0.0..c);
        let vectors = [[v0, 0.0], [v1, 0.0]];
        if v0 <= 1e-3 || v1 >= -1e-3 {
            continue;
        }
        if matches!(
            rational_independence_check(1, &vectors, SAMPLE_INDEPENDENCE_BOUND),
            IndependenceVerdict::Dependent(_)
        ) {
            continue;
        }
        let pieces = vec![
            Piece::new(vec![Primitive::Interval { lo: 0.0, hi: c, hi_closed: false }]).expect("valid interval"),
            Piece::new(vec![Primitive::Interval { lo: c, hi: 1.0, hi_closed: false }]).expect("valid interval"),
        ];
        return PwtMap::new(Domain::Interval { lo: 0.0, hi: 1.0 }, pieces, vectors.to_vec()).expect("valid by construction");
    }
}

/// Random valid `m`-branch map of `[0, 1)` whose cuts and vectors have
/// denominators at most `max_den`. Each piece `[c_i, c_{i+1})` gets a vector in
/// `[-c_i, 1 - c_{i+1}]`, so the map is well defined.
pub fn random_rational_interval_map<R: Rng>(rng: &mut R, m: usize, max_den: i64) -> IntervalMap {
    let den = |rng: &mut R| rng.gen_range(2..=max_den) as i128;
    let frac = |rng: &mut R, lo: Rational, hi: Rational| -> Option<Rational> {
        // a fraction with small denominator in [lo, hi]
        for _ in 0..64 {
            let q = den(rng);
            let a = (lo * Rational::from_integer(q)).ceil().to_integer();
            let b = (hi * Rational::from_integer(q)).floor().to_integer();
            if a <= b {
                return Some(Rational::new(rng.gen_range(a..=b), q));
            }
        }
        None
    };
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    loop {
        let mut cuts: Vec<Rational> = Vec::with_capacity(m - 1);
        let mut ok = true;
        while cuts.len() < m - 1 {
            match frac(rng, Rational::new(1, max_den as i128), one - Rational::new(1, max_den as i128)) {
                Some(c) if !cuts.contains(&c) => cuts.push(c),
                Some(_) => {}
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        cuts.sort();
        let mut bounds = vec![zero];
        bounds.extend(cuts.iter().copied());
        bounds.push(one);
        let mut vectors = Vec::with_capacity(m);
        for i in 0..m {
            match frac(rng, -bounds[i], one - bounds[i + 1]) {
                Some(v) => vectors.push(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if let Ok(map) = IntervalMap::new(zero, one, cuts, vectors) {
            return map;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn disk_maps_stay_in_the_disk() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_disk_map(&mut rng);
            assert_eq!((m.dim(), m.m()), (2, 3));
            let v = m.validate_sampled(4000, 11);
            assert!(v.is_valid(0.0), "{v:?}");
        }
    }

    #[test]
    fn shift_check_matches_sampling() {
        // oracle: sample the shifted sector densely
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let apex = [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];
            let a = rng.gen_range(0.0..TAU);
            let b = a + rng.gen_range(0.3..3.0);
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let fits = sector_shift_fits(apex, a, b, v);
            let mut worst: f64 = 0.0;
            for i in 0..=200 {
                let t = a + (b - a) * i as f64 / 200.0;
                let q = ray_exit(apex, unit(t));
                for s in [0.0, 0.5, 1.0] {
                    let p = [apex[0] + s * (q[0] - apex[0]) + v[0], apex[1] + s * (q[1] - apex[1]) + v[1]];
                    worst = worst.max(norm2(p));
                }
            }
            if fits {
                assert!(worst <= 1.0, "{apex:?} {a} {b} {v:?}");
            } else {
                assert!(worst > 1.0 - 1e-3, "{apex:?} {a} {b} {v:?} {worst}");
            }
        }
    }

    #[test]
    fn outside_shift_rejected() {
        let e = sector_disk_map([0.0, 0.0], [0.0, 2.0, 4.0], [[0.9, 0.0], [0.0, 0.0], [0.0, 0.0]]).unwrap_err();
        assert!(matches!(e, LabError::MapsOutside { piece: 0, .. }));
    }

    #[test]
    fn rational_interval_maps_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in [2, 3] {
            for _ in 0..50 {
                let map = random_rational_interval_map(&mut rng, m, 64);
                assert_eq!(map.m(), m);
                for i in 0..m {
                    let (lo, hi) = (map.bounds()[i], map.bounds()[i + 1]);
                    let v = map.vectors()[i];
                    assert!(lo + v >= Rational::from_integer(0) && hi + v <= Rational::from_integer(1));
                    assert!(*lo.denom() <= 64 && *v.denom() <= 64);
                }
            }
        }
    }
}
