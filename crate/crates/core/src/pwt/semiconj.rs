//! Residual of the torus-factor identity `R ∘ π = π ∘ F`.

use super::exact::IntervalMap;
use super::map::PwtMap;
use crate::error::{LabError, Result};
use crate::geometry::{Lattice, Point, Rational};

/// `max_{n<k} dist(π(F^{n+1} x), π(F^n x) + v_0)` on `R^d / L`.
pub fn semiconjugacy_residual(map: &PwtMap, lattice: &Lattice, x: Point, k: u64) -> Result<f64> {
    if map.m() != map.dim() + 1 {
        return Err(LabError::InvalidMap(format!(
            "torus factor needs {} branches, map has {}",
            map.dim() + 1,
            map.m()
        )));
    }
    let v0 = map.vectors()[0];
    let mut worst = 0.0f64;
    let mut y = x;
    for _ in 0..k {
        let next = map.step(y)?;
        let p = lattice.reduce(y);
        let rotated = lattice.reduce([p[0] + v0[0], p[1] + v0[1]]);
        worst = worst.max(lattice.torus_distance(lattice.reduce(next), rotated));
        y = next;
    }
    Ok(worst)
}

/// Exact residual on the line: `F^{n+1} x - F^n x - v_0` must lie in `(v_1 - v_0) Z`.
/// Returns the number of steps where it does not.
pub fn semiconjugacy_defects_exact(map: &IntervalMap, x: Rational, k: u64) -> Result<u64> {
    if map.m() != 2 {
        return Err(LabError::InvalidMap(format!("torus factor on the line needs 2 branches, map has {}", map.m())));
    }
    let v = map.vectors();
    let b = v[1] - v[0];
    if b == Rational::from_integer(0) {
        return Err(LabError::RankDeficient { det: 0.0, tolerance: 0.0 });
    }
    let mut defects = 0;
    let mut y = x;
    for _ in 0..k {
        let next = map.step(y)?;
        if !((next - y - v[0]) / b).is_integer() {
            defects += 1;
        }
        y = next;
    }
    Ok(defects)
}
