//! Occupancy grids and point clouds approximating sets in the plane or on the torus.

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::region::{wrap01, Domain};
use super::Point;
use crate::error::{LabError, Result};

/// Cells are half-open boxes `[origin + i h, origin + (i+1) h)`, row-major with `x` fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyGrid {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub torus: bool,
    #[serde(skip)]
    cells: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(origin: Point, h: f64, nx: usize, ny: usize, torus: bool) -> Self {
        Self {
            origin,
            h,
            nx,
            ny,
            torus,
            cells: vec![false; nx * ny],
        }
    }

    /// Grid covering the bounding box of `domain` with cell size `h`.
    pub fn for_domain(domain: &Domain, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(LabError::BadRegionSpec(format!("cell size must be positive, got {h}")));
        }
        domain.validate()?;
        if domain.is_torus() {
            let n = (1.0 / h).round().max(1.0) as usize;
            return Ok(Self::new([0.0, 0.0], 1.0 / n as f64, n, n, true));
        }
        let (lo, hi) = domain.bbox();
        let nx = ((hi[0] - lo[0]) / h).ceil().max(1.0) as usize;
        let ny = if domain.dim() == 1 {
            1
        } else {
            ((hi[1] - lo[1]) / h).ceil().max(1.0) as usize
        };
        let origin = if domain.dim() == 1 {
            [lo[0], -0.5 * h]
        } else {
            lo
        };
        Ok(Self::new(origin, h, nx, ny, false))
    }

    pub fn dim(&self) -> usize {
        if self.ny == 1 && !self.torus {
            1
        } else {
            2
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [bool] {
        &mut self.cells
    }

    pub fn clear(&mut self) {
        self.cells.iter_mut().for_each(|c| *c = false);
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, value: bool) {
        self.cells[idx] = value;
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Cell containing `x`, wrapping on the torus; `None` outside a flat grid.
    #[inline]
    pub fn cell_of(&self, x: Point) -> Option<usize> {
        if self.torus {
            let i = ((wrap01(x[0]) * self.nx as f64) as usize).min(self.nx - 1);
            let j = ((wrap01(x[1]) * self.ny as f64) as usize).min(self.ny - 1);
            return Some(self.index(i, j));
        }
        let fi = ((x[0] - self.origin[0]) / self.h).floor();
        let fj = if self.ny == 1 {
            0.0
        } else {
            ((x[1] - self.origin[1]) / self.h).floor()
        };
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    #[inline]
    pub fn center(&self, idx: usize) -> Point {
        let i = idx % self.nx;
        let j = idx / self.nx;
        let y = if self.ny == 1 && !self.torus {
            0.0
        } else {
            self.origin[1] + (j as f64 + 0.5) * self.h
        };
        [self.origin[0] + (i as f64 + 0.5) * self.h, y]
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn occupied_indices(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim() == 1 {
            self.h
        } else {
            self.h * self.h
        }
    }

    /// Occupied cell count times the cell volume.
    pub fn measure(&self) -> f64 {
        self.occupied_count() as f64 * self.cell_volume()
    }

    pub fn contains_point(&self, x: Point) -> bool {
        self.cell_of(x).is_some_and(|i| self.cells[i])
    }

    /// Whether any cell within `r` cells (Chebyshev) of the cell of `x` differs from it.
    pub fn near_boundary(&self, x: Point, r: usize) -> bool {
        let fi = ((x[0] - self.origin[0]) / self.h).floor() as i64;
        let fj = if self.ny == 1 {
            0
        } else {
            ((x[1] - self.origin[1]) / self.h).floor() as i64
        };
        let state = |i: i64, j: i64| -> bool {
            if self.torus {
                let ii = i.rem_euclid(self.nx as i64) as usize;
                let jj = j.rem_euclid(self.ny as i64) as usize;
                self.cells[self.index(ii, jj)]
            } else if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                false
            } else {
                self.cells[self.index(i as usize, j as usize)]
            }
        };
        let me = state(fi, fj);
        let r = r as i64;
        let rj = if self.ny == 1 && !self.torus { 0 } else { r };
        for dj in -rj..=rj {
            for di in -r..=r {
                if state(fi + di, fj + dj) != me {
                    return true;
                }
            }
        }
        false
    }

    /// Bounding box `(min, max)` of the occupied cells.
    pub fn occupied_bbox(&self) -> Option<(Point, Point)> {
        let mut lo = [usize::MAX; 2];
        let mut hi = [0usize; 2];
        let mut any = false;
        for (idx, &c) in self.cells.iter().enumerate() {
            if c {
                any = true;
                let (i, j) = (idx % self.nx, idx / self.nx);
                lo = [lo[0].min(i), lo[1].min(j)];
                hi = [hi[0].max(i), hi[1].max(j)];
            }
        }
        any.then(|| {
            let y0 = if self.dim() == 1 { 0.0 } else { self.origin[1] + lo[1] as f64 * self.h };
            let y1 = if self.dim() == 1 {
                0.0
            } else {
                self.origin[1] + (hi[1] + 1) as f64 * self.h
            };
            (
                [self.origin[0] + lo[0] as f64 * self.h, y0],
                [self.origin[0] + (hi[0] + 1) as f64 * self.h, y1],
            )
        })
    }

    /// Rows of the grid from top (largest y) to bottom, for image export.
    pub fn rows_top_down(&self) -> impl Iterator<Item = &[bool]> {
        self.cells.chunks(self.nx).rev()
    }
}

/// Point cloud plus occupancy grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SetApprox {
    pub points: Vec<Point>,
    pub grid: OccupancyGrid,
}

impl SetApprox {
    /// Wraps `points` onto the torus when needed and rebuilds the occupancy.
    pub fn from_points(mut points: Vec<Point>, mut grid: OccupancyGrid) -> Self {
        grid.clear();
        if grid.torus {
            for p in points.iter_mut() {
                *p = [wrap01(p[0]), wrap01(p[1])];
            }
        }
        points.retain(|&p| grid.cell_of(p).is_some());
        for &p in &points {
            let idx = grid.cell_of(p).expect("retained");
            grid.set(idx, true);
        }
        Self { points, grid }
    }

    /// One point at the center of every cell whose center lies in `domain`.
    pub fn full(domain: &Domain, h: f64) -> Result<Self> {
        let grid = OccupancyGrid::for_domain(domain, h)?;
        let points: Vec<Point> = (0..grid.len())
            .map(|i| grid.center(i))
            .filter(|&c| domain.contains(c))
            .collect();
        Ok(Self::from_points(points, grid))
    }

    /// Cloud made of the centers of the occupied cells of `grid`.
    pub fn from_grid(grid: OccupancyGrid) -> Self {
        let points = grid.occupied_indices().into_iter().map(|i| grid.center(i)).collect();
        Self { points, grid }
    }

    /// Occupancy recomputed from the stored points agrees with the stored grid.
    pub fn is_consistent(&self) -> bool {
        let rebuilt = Self::from_points(self.points.clone(), self.grid.clone());
        rebuilt.grid.cells() == self.grid.cells() && rebuilt.points.len() == self.points.len()
    }

    pub fn measure(&self) -> f64 {
        self.grid.measure()
    }
}

/// Seeded stratified (jittered) sample of `n_points` points of `domain`, with
/// occupancy at cell size `h`.
pub fn set_approx_from_region(domain: &Domain, n_points: usize, h: f64, seed: u64) -> Result<SetApprox> {
    domain.validate()?;
    if n_points == 0 {
        return Err(LabError::BadRegionSpec("n_points must be at least 1".into()));
    }
    let grid = OccupancyGrid::for_domain(domain, h)?;
    let (lo, hi) = domain.bbox();
    let dim = domain.dim();
    let bbox_volume = if dim == 1 {
        hi[0] - lo[0]
    } else {
        (hi[0] - lo[0]) * (hi[1] - lo[1])
    };
    let fill = (domain.volume() / bbox_volume).clamp(1e-6, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = n_points as f64 / fill;
    let mut points = Vec::new();
    if dim == 1 {
        let k = wanted.ceil().max(1.0) as usize;
        let w = (hi[0] - lo[0]) / k as f64;
        for i in 0..k {
            let p = [lo[0] + (i as f64 + rng.gen::<f64>()) * w, 0.0];
            if domain.contains(p) {
                points.push(p);
            }
        }
    } else {
        let mut k = wanted.sqrt().ceil().max(1.0) as usize;
        loop {
            points.clear();
            let wx = (hi[0] - lo[0]) / k as f64;
            let wy = (hi[1] - lo[1]) / k as f64;
            for j in 0..k {
                for i in 0..k {
                    let p = [
                        lo[0] + (i as f64 + rng.gen::<f64>()) * wx,
                        lo[1] + (j as f64 + rng.gen::<f64>()) * wy,
                    ];
                    if domain.contains(p) {
                        points.push(p);
                    }
                }
            }
            if points.len() >= n_points {
                break;
            }
            k += 1;
        }
    }
    if points.len() > n_points {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.shuffle(&mut rng);
        order.truncate(n_points);
        order.sort_unstable();
        points = order.into_iter().map(|i| points[i]).collect();
    }
    Ok(SetApprox::from_points(points, grid))
}
