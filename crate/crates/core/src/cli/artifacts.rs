//! In-memory artifacts, PGM encoding and the single writer per output directory.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::circle::Histogram;
use crate::error::{LabError, Result};
use crate::geometry::OccupancyGrid;

/// A file to be written under the output directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            bytes,
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| LabError::Io(e.to_string()))?;
        bytes.push(b'\n');
        Ok(Self::new(name, bytes))
    }
}

/// Binary PGM of `(width, height, rows top-down)`; `true` is black (0).
pub fn encode_pgm<'a>(width: usize, height: usize, rows: impl Iterator<Item = &'a [bool]>) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for row in rows {
        out.extend(row.iter().map(|&b| if b { 0u8 } else { 255u8 }));
    }
    out
}

pub fn grid_pgm(grid: &OccupancyGrid) -> Vec<u8> {
    encode_pgm(grid.nx, grid.ny, grid.rows_top_down())
}

/// Bar chart of a histogram: one column per bin, `height` rows, bars black.
pub fn histogram_pgm(hist: &Histogram, height: usize) -> Vec<u8> {
    let max = hist.mass.iter().cloned().fold(0.0, f64::max);
    let bars: Vec<usize> = hist
        .mass
        .iter()
        .map(|&m| if max > 0.0 { (m / max * height as f64).round() as usize } else { 0 })
        .collect();
    let rows: Vec<Vec<bool>> = (0..height)
        .map(|r| {
            let level = height - r;
            bars.iter().map(|&b| b >= level).collect()
        })
        .collect();
    encode_pgm(hist.bins, height, rows.iter().map(|r| r.as_slice()))
}

/// Writes every artifact into `dir`, creating it if needed.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
    }
    Ok(())
}
