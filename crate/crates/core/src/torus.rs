//! Four-branch piecewise translations of the 2-torus: skew products over a
//! circle rotation and rectangle double rotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attractor::{forward_images_raster, RasterRun};
use crate::error::{LabError, Result};
use crate::geometry::{in_arc, wrap01, Domain, Piece, Point, Primitive};
use crate::pwt::{rational_independence_check, IndependenceVerdict, PwtMap};

/// Coefficient bound of the irrationality check on the base angle.
pub const BASE_ANGLE_BOUND: u64 = 1000;

pub const DEFAULT_TORUS_GRID: usize = 1024;

/// `F(x, y) = (x + base_angle, T(x, y))` with a rigid fiber rotation by
/// `fiber_alpha` over `x ∈ [0, 1 - base_angle)` and the double rotation
/// `T_{alpha, beta, delta}` over the rest of the base.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewProductMap {
    pub base_angle: f64,
    pub fiber_alpha: f64,
    pub fiber_beta: f64,
    pub fiber_delta: f64,
}

impl SkewProductMap {
    pub fn new(base_angle: f64, fiber_alpha: f64, fiber_beta: f64, fiber_delta: f64) -> Result<Self> {
        let m = Self {
            base_angle,
            fiber_alpha,
            fiber_beta,
            fiber_delta,
        };
        m.check_ranges()?;
        if let IndependenceVerdict::Dependent(w) =
            rational_independence_check(1, &[[base_angle, 0.0], [-1.0, 0.0]], BASE_ANGLE_BOUND)
        {
            return Err(LabError::InvalidMap(format!(
                "base angle {base_angle} satisfies the integer relation {w:?}"
            )));
        }
        Ok(m)
    }

    /// The product partition case: the fiber circle is cut into
    /// `[0, 1 - fiber_alpha]` and the rest, so `fiber_delta = 1 - fiber_alpha`.
    pub fn from_partition(base_angle: f64, fiber_alpha: f64, fiber_beta: f64) -> Result<Self> {
        Self::new(base_angle, fiber_alpha, fiber_beta, 1.0 - fiber_alpha)
    }

    fn check_ranges(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.base_angle)
            || !(0.0..1.0).contains(&self.fiber_alpha)
            || !(0.0..1.0).contains(&self.fiber_beta)
            || !(0.0..=1.0).contains(&self.fiber_delta)
        {
            return Err(LabError::InvalidMap(format!("skew product parameters out of range: {self:?}")));
        }
        Ok(())
    }

    /// Whether `x` lies over the rigid-rotation part `[0, 1 - base_angle)` of the base.
    #[inline]
    pub fn rigid_fiber(&self, x: f64) -> bool {
        x < 1.0 - self.base_angle
    }

    pub fn skew_step(&self, p: Point) -> Point {
        let [x, y] = p;
        let y2 = if self.rigid_fiber(x) || y > self.fiber_delta {
            y + self.fiber_alpha
        } else {
            y + self.fiber_alpha + self.fiber_beta
        };
        [wrap01(x + self.base_angle), wrap01(y2)]
    }

    /// The map as four product pieces `Delta_ij` on the torus.
    pub fn to_pwt_map(&self) -> Result<PwtMap> {
        let a = self.base_angle;
        let d = self.fiber_delta;
        let rect = |x0: f64, w: f64, y0: f64, h: f64| Piece::new(vec![Primitive::TorusRect { corner: [x0, y0], size: [w, h] }]);
        let mut pieces = Vec::new();
        let mut vectors = Vec::new();
        for (x0, w, kicked) in [(0.0, 1.0 - a, false), (1.0 - a, a, true)] {
            for (y0, h, low) in [(0.0, d, true), (d, 1.0 - d, false)] {
                if h <= 0.0 {
                    continue;
                }
                pieces.push(rect(x0, w, y0, h)?);
                let extra = if kicked && low { self.fiber_beta } else { 0.0 };
                vectors.push([a, self.fiber_alpha + extra]);
            }
        }
        PwtMap::new(Domain::TorusSquare, pieces, vectors)
    }

    /// Parameters rounded to multiples of `1/n`. The result is a rational
    /// skew product, so the irrationality check is skipped.
    pub fn snapped(&self, n: usize) -> Result<Self> {
        let s = |v: f64| snap(v, n);
        let m = Self {
            base_angle: s(self.base_angle),
            fiber_alpha: s(self.fiber_alpha),
            fiber_beta: s(self.fiber_beta),
            fiber_delta: s(self.fiber_delta),
        };
        m.check_ranges()?;
        Ok(m)
    }
}

/// `x + gamma2` on the half-open rectangle `R`, `x + gamma1` elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusDoubleRotation {
    pub corner: Point,
    pub size: Point,
    pub gamma1: Point,
    pub gamma2: Point,
}

impl TorusDoubleRotation {
    pub fn new(corner: Point, size: Point, gamma1: Point, gamma2: Point) -> Result<Self> {
        if !size.iter().all(|&s| s > 0.0 && s < 1.0) {
            return Err(LabError::InvalidMap(format!("rectangle sizes must lie in (0,1), got {size:?}")));
        }
        if !corner.iter().chain(&gamma1).chain(&gamma2).all(|v| v.is_finite()) {
            return Err(LabError::InvalidMap("non-finite torus double rotation data".into()));
        }
        Ok(Self {
            corner: [wrap01(corner[0]), wrap01(corner[1])],
            size,
            gamma1,
            gamma2,
        })
    }

    #[inline]
    pub fn in_rect(&self, p: Point) -> bool {
        in_arc(p[0], self.corner[0], self.size[0]) && in_arc(p[1], self.corner[1], self.size[1])
    }

    pub fn torus_dr_step(&self, p: Point) -> Point {
        let g = if self.in_rect(p) { self.gamma2 } else { self.gamma1 };
        [wrap01(p[0] + g[0]), wrap01(p[1] + g[1])]
    }

    /// Four product pieces: (strip or not) x (band or not), with `R` = strip x band.
    pub fn to_pwt_map(&self) -> Result<PwtMap> {
        let [x0, y0] = self.corner;
        let [w, h] = self.size;
        let mut pieces = Vec::new();
        let mut vectors = Vec::new();
        for (xs, xw, in_strip) in [(x0, w, true), (x0 + w, 1.0 - w, false)] {
            for (ys, yh, in_band) in [(y0, h, true), (y0 + h, 1.0 - h, false)] {
                pieces.push(Piece::new(vec![Primitive::TorusRect {
                    corner: [wrap01(xs), wrap01(ys)],
                    size: [xw, yh],
                }])?);
                vectors.push(if in_strip && in_band { self.gamma2 } else { self.gamma1 });
            }
        }
        PwtMap::new(Domain::TorusSquare, pieces, vectors)
    }

    pub fn snapped(&self, n: usize) -> Result<Self> {
        let s = |p: Point| [snap(p[0], n), snap(p[1], n)];
        Self::new(s(self.corner), s(self.size), s(self.gamma1), s(self.gamma2))
    }
}

fn snap(v: f64, n: usize) -> f64 {
    (v * n as f64).round() / n as f64
}

/// Number of cells per side for cell size `h`; `h` must divide 1.
pub fn grid_side(h: f64) -> Result<usize> {
    let n = 1.0 / h;
    if !(h > 0.0 && h <= 1.0) || (n - n.round()).abs() > 1e-9 * n {
        return Err(LabError::Config(format!("torus cell size {h} does not divide 1")));
    }
    Ok(n.round() as usize)
}

/// Either torus family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TorusMap {
    SkewProduct(SkewProductMap),
    DoubleRotation(TorusDoubleRotation),
}

impl TorusMap {
    pub fn step(&self, p: Point) -> Point {
        match self {
            TorusMap::SkewProduct(m) => m.skew_step(p),
            TorusMap::DoubleRotation(m) => m.torus_dr_step(p),
        }
    }

    pub fn to_pwt_map(&self) -> Result<PwtMap> {
        match self {
            TorusMap::SkewProduct(m) => m.to_pwt_map(),
            TorusMap::DoubleRotation(m) => m.to_pwt_map(),
        }
    }

    pub fn snapped(&self, n: usize) -> Result<Self> {
        Ok(match self {
            TorusMap::SkewProduct(m) => TorusMap::SkewProduct(m.snapped(n)?),
            TorusMap::DoubleRotation(m) => TorusMap::DoubleRotation(m.snapped(n)?),
        })
    }
}

/// Raster iteration of the full torus with cells of side `h`. With
/// `commensurate`, parameters are first snapped to the grid, which makes the
/// cell map exact.
pub fn torus_forward_images(
    map: &TorusMap,
    h: f64,
    n_max: usize,
    snapshot_at: &[usize],
    commensurate: bool,
) -> Result<RasterRun> {
    let n = grid_side(h)?;
    let map = if commensurate { map.snapped(n)? } else { *map };
    forward_images_raster(&map.to_pwt_map()?, 1.0 / n as f64, n_max, snapshot_at)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkewProbeRecord {
    pub map: SkewProductMap,
    pub stabilized_at: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkewProbeReport {
    pub h: f64,
    pub n_max: usize,
    pub seed: u64,
    pub records: Vec<SkewProbeRecord>,
    pub stabilized_fraction: f64,
}

/// Raster runs over seeded random skew products in the product-partition case.
/// Data for the finite-type conjecture; nothing is asserted.
pub fn skew_product_probe(samples: usize, seed: u64, h: f64, n_max: usize) -> Result<SkewProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut maps = Vec::with_capacity(samples);
    while maps.len() < samples {
        let a = rng.gen_range(0.05..0.95);
        let alpha = rng.gen_range(0.05..0.95);
        let beta = rng.gen_range(0.01..0.2);
        if let Ok(m) = SkewProductMap::from_partition(a, alpha, beta) {
            maps.push(m);
        }
    }
    let records = maps
        .into_par_iter()
        .map(|m| {
            let run = torus_forward_images(&TorusMap::SkewProduct(m), h, n_max, &[], false)?;
            Ok(SkewProbeRecord {
                map: m,
                stabilized_at: run.trace.stabilized_at,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stabilized = records.iter().filter(|r| r.stabilized_at.is_some()).count();
    Ok(SkewProbeReport {
        h,
        n_max,
        seed,
        stabilized_fraction: stabilized as f64 / samples.max(1) as f64,
        records,
    })
}
