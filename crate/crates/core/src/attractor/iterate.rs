//! Forward images `Omega_n = F(Omega_{n-1})` in exact 1D and raster modes.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{ArcUnion, OccupancyGrid, Rational, Scalar};
use crate::pwt::{IntervalMap, PwtMap};

pub const DEFAULT_N_MAX: usize = 5000;

const NO_TARGET: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Stabilized,
    MaxIterReached,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterateRecord {
    pub n: usize,
    pub measure: f64,
    /// Occupied cells (raster) or interval count (exact).
    pub occupied: usize,
    /// Cells or intervals that changed since `n - 1`.
    pub changed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationTrace {
    pub records: Vec<IterateRecord>,
    /// Smallest `n >= 1` with `Omega_n = Omega_{n+1}`.
    pub stabilized_at: Option<usize>,
    pub status: Status,
    /// Cell size of a raster run; `None` in exact mode.
    pub h: Option<f64>,
}

impl IterationTrace {
    pub fn is_stabilized(&self) -> bool {
        self.status == Status::Stabilized
    }

    pub fn require_stabilized(&self) -> Result<usize> {
        self.stabilized_at.ok_or(LabError::NotStabilized)
    }
}

/// Result of an exact run on the line.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactRun {
    pub trace: IterationTrace,
    /// Exact measures of `Omega_0, Omega_1, ...`.
    pub measures: Vec<Rational>,
    /// Last computed iterate: the attractor when stabilized.
    pub set: ArcUnion<Rational>,
}

/// Exact interval-union iteration of a rational map on the line.
pub fn forward_images_exact(map: &IntervalMap, initial: &ArcUnion<Rational>, n_max: usize) -> Result<ExactRun> {
    if n_max == 0 {
        return Err(LabError::Config("n_max must be at least 1".into()));
    }
    if !map.domain_set().contains(initial) {
        return Err(LabError::OutsideDomain(initial.arcs().first().map(|a| vec![a.0.to_f64()]).unwrap_or_default()));
    }
    let mut cur = initial.clone();
    let mut measures = vec![cur.measure()];
    let mut records = vec![IterateRecord {
        n: 0,
        measure: cur.measure().to_f64(),
        occupied: cur.len(),
        changed: 0,
    }];
    // one extra image beyond n_max is computed to recognize Omega_{n_max} = Omega_{n_max + 1}
    for n in 1..=n_max + 1 {
        let next = map.image(&cur);
        let changed = cur.difference(&next).len() + next.difference(&cur).len();
        if n <= n_max {
            measures.push(next.measure());
            records.push(IterateRecord {
                n,
                measure: next.measure().to_f64(),
                occupied: next.len(),
                changed,
            });
        }
        if changed == 0 {
            return Ok(ExactRun {
                trace: IterationTrace {
                    records,
                    stabilized_at: Some((n - 1).max(1)),
                    status: Status::Stabilized,
                    h: None,
                },
                measures,
                set: cur,
            });
        }
        cur = next;
    }
    Ok(ExactRun {
        trace: IterationTrace {
            records,
            stabilized_at: None,
            status: Status::MaxIterReached,
            h: None,
        },
        measures,
        set: cur,
    })
}

/// The map acting on grid cells: each cell moves with its center.
///
/// Cells whose center lies outside the domain follow the piece of the nearest
/// domain point; targets outside a flat grid are dropped.
#[derive(Clone, Debug)]
pub struct CellMap {
    grid: OccupancyGrid,
    targets: Vec<u32>,
    pieces: Vec<u8>,
    /// Cells whose center lies in the domain.
    seed_cells: Vec<u32>,
}

impl CellMap {
    pub fn new(map: &PwtMap, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(LabError::Config(format!("grid cell size must be positive, got {h}")));
        }
        let h_abs = if map.is_torus() { h } else { h * map.domain().diameter() };
        let grid = OccupancyGrid::for_domain(map.domain(), h_abs)?;
        if grid.len() >= NO_TARGET as usize {
            return Err(LabError::Config(format!("grid of {} cells is too large", grid.len())));
        }
        let mut targets = vec![NO_TARGET; grid.len()];
        let mut pieces = vec![u8::MAX; grid.len()];
        let mut seed_cells = Vec::new();
        for idx in 0..grid.len() {
            let c = grid.center(idx);
            if map.domain().contains(c) {
                seed_cells.push(idx as u32);
            }
            if let Some(i) = map.piece_of_nearest(c) {
                pieces[idx] = i as u8;
                let v = map.vectors()[i];
                if let Some(t) = grid.cell_of([c[0] + v[0], c[1] + v[1]]) {
                    targets[idx] = t as u32;
                }
            }
        }
        Ok(Self {
            grid,
            targets,
            pieces,
            seed_cells,
        })
    }

    /// Empty grid with the geometry of this cell map.
    pub fn blank(&self) -> OccupancyGrid {
        let mut g = self.grid.clone();
        g.clear();
        g
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn target(&self, idx: usize) -> Option<usize> {
        let t = self.targets[idx];
        (t != NO_TARGET).then_some(t as usize)
    }

    /// Piece index used for cell `idx`.
    pub fn piece(&self, idx: usize) -> Option<usize> {
        let p = self.pieces[idx];
        (p != u8::MAX).then_some(p as usize)
    }

    /// `Omega_0`: forward closure of the cells centered in the domain, so that
    /// `F(Omega_0) ⊆ Omega_0` and the iterates are nested.
    pub fn initial(&self) -> Vec<bool> {
        let mut inside = vec![false; self.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &c in &self.seed_cells {
            inside[c as usize] = true;
            queue.push_back(c as usize);
        }
        while let Some(c) = queue.pop_front() {
            if let Some(t) = self.target(c) {
                if !inside[t] {
                    inside[t] = true;
                    queue.push_back(t);
                }
            }
        }
        inside
    }

    /// One image step of an arbitrary cell set.
    pub fn image(&self, set: &[bool]) -> Vec<bool> {
        let mut out = vec![false; set.len()];
        for (idx, _) in set.iter().enumerate().filter(|(_, &b)| b) {
            if let Some(t) = self.target(idx) {
                out[t] = true;
            }
        }
        out
    }

    /// Survival depth of each cell of `omega0`: cell `c` lies in `Omega_n`
    /// exactly when `depth[c] >= n`. Cells on cycles get `u32::MAX`.
    pub fn depths(&self, omega0: &[bool]) -> Vec<u32> {
        let n = self.len();
        let mut indeg = vec![0u32; n];
        for (c, _) in omega0.iter().enumerate().filter(|(_, &on)| on) {
            if let Some(t) = self.target(c) {
                indeg[t] += 1;
            }
        }
        let mut depth = vec![u32::MAX; n];
        let mut frontier: Vec<usize> = (0..n).filter(|&c| omega0[c] && indeg[c] == 0).collect();
        let mut round = 0u32;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &c in &frontier {
                depth[c] = round;
                if let Some(t) = self.target(c) {
                    indeg[t] -= 1;
                    if indeg[t] == 0 {
                        next.push(t);
                    }
                }
            }
            frontier = next;
            round += 1;
        }
        for c in 0..n {
            if !omega0[c] {
                depth[c] = 0;
            }
        }
        depth
    }
}

/// Result of a raster run.
#[derive(Clone, Debug)]
pub struct RasterRun {
    pub trace: IterationTrace,
    /// `Omega_{n*}` when stabilized, else `Omega_{n_max}`.
    pub grid: OccupancyGrid,
    /// Requested snapshots `(n, Omega_n)`.
    pub snapshots: Vec<(usize, OccupancyGrid)>,
    pub cell_map: CellMap,
}

/// Raster iteration of the whole domain at relative cell size `h` (absolute on the torus).
pub fn forward_images_raster(map: &PwtMap, h: f64, n_max: usize, snapshot_at: &[usize]) -> Result<RasterRun> {
    if n_max == 0 {
        return Err(LabError::Config("n_max must be at least 1".into()));
    }
    let cell_map = CellMap::new(map, h)?;
    let omega0 = cell_map.initial();
    let depth = cell_map.depths(&omega0);
    let total = omega0.iter().filter(|&&b| b).count();
    // removed[r] = cells leaving between Omega_r and Omega_{r+1}
    let mut removed: Vec<usize> = Vec::new();
    for (c, &d) in depth.iter().enumerate() {
        if omega0[c] && d != u32::MAX {
            let d = d as usize;
            if removed.len() <= d {
                removed.resize(d + 1, 0);
            }
            removed[d] += 1;
        }
    }
    let stab = removed.len().max(1);
    let (status, stabilized_at, last) = if stab <= n_max {
        (Status::Stabilized, Some(stab), stab)
    } else {
        (Status::MaxIterReached, None, n_max)
    };
    let grid0 = cell_map.blank();
    let vol = grid0.cell_volume();
    let mut records = Vec::with_capacity(last + 1);
    let mut occupied = total;
    for n in 0..=last {
        let changed = if n == 0 { 0 } else { removed.get(n - 1).copied().unwrap_or(0) };
        occupied -= changed;
        records.push(IterateRecord {
            n,
            measure: occupied as f64 * vol,
            occupied,
            changed,
        });
    }
    let level = |n: usize| -> OccupancyGrid {
        let mut g = cell_map.blank();
        for (c, &d) in depth.iter().enumerate() {
            if omega0[c] && (d == u32::MAX || d as usize >= n) {
                g.set(c, true);
            }
        }
        g
    };
    let grid = level(last);
    let snapshots = snapshot_at.iter().map(|&n| (n, level(n.min(last)))).collect();
    Ok(RasterRun {
        trace: IterationTrace {
            records,
            stabilized_at,
            status,
            h: Some(h),
        },
        grid,
        snapshots,
        cell_map,
    })
}
