//! Membership predicates for map pieces and domains.

use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{LabError, Result};

/// One membership primitive. A piece is the intersection of its primitives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    /// `lo <= x < hi` on the first coordinate (`<= hi` when `hi_closed`).
    Interval {
        lo: f64,
        hi: f64,
        #[serde(default)]
        hi_closed: bool,
    },
    /// `normal . x <= offset`.
    HalfPlane { normal: [f64; 2], offset: f64 },
    Disk { center: [f64; 2], radius: f64 },
    /// Axis-aligned `[min, max)` box.
    Rect { min: [f64; 2], max: [f64; 2] },
    /// Half-open rectangle on the unit torus, wrapping across `1`.
    TorusRect { corner: [f64; 2], size: [f64; 2] },
}

impl Primitive {
    #[inline]
    pub fn contains(&self, x: Point) -> bool {
        match *self {
            Primitive::Interval { lo, hi, hi_closed } => {
                lo <= x[0] && (x[0] < hi || (hi_closed && x[0] == hi))
            }
            Primitive::HalfPlane { normal, offset } => normal[0] * x[0] + normal[1] * x[1] <= offset,
            Primitive::Disk { center, radius } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Primitive::Rect { min, max } => {
                min[0] <= x[0] && x[0] < max[0] && min[1] <= x[1] && x[1] < max[1]
            }
            Primitive::TorusRect { corner, size } => {
                in_arc(x[0], corner[0], size[0]) && in_arc(x[1], corner[1], size[1])
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Primitive::Interval { lo, hi, .. } => lo.is_finite() && hi.is_finite() && lo < hi,
            Primitive::HalfPlane { normal, offset } => {
                offset.is_finite() && normal.iter().all(|c| c.is_finite()) && normal != [0.0, 0.0]
            }
            Primitive::Disk { center, radius } => {
                radius.is_finite() && radius > 0.0 && center.iter().all(|c| c.is_finite())
            }
            Primitive::Rect { min, max } => min[0] < max[0] && min[1] < max[1],
            Primitive::TorusRect { size, .. } => size.iter().all(|&s| s > 0.0 && s <= 1.0),
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::BadRegionSpec(format!("{self:?}")))
        }
    }
}

/// `x ∈ [start, start + len)` on `R/Z`; `x` is taken in `[0, 1)`.
#[inline]
pub fn in_arc(x: f64, start: f64, len: f64) -> bool {
    if len >= 1.0 {
        return true;
    }
    let mut d = x - start;
    d -= d.floor();
    d < len
}

/// Intersection of primitives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Piece(pub Vec<Primitive>);

impl Piece {
    pub fn new(parts: Vec<Primitive>) -> Result<Self> {
        if parts.is_empty() {
            return Err(LabError::BadRegionSpec("piece with no primitives".into()));
        }
        for p in &parts {
            p.validate()?;
        }
        Ok(Self(parts))
    }

    #[inline]
    pub fn contains(&self, x: Point) -> bool {
        self.0.iter().all(|p| p.contains(x))
    }
}

/// The phase-space region `Omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// `[lo, hi)` on the line.
    Interval { lo: f64, hi: f64 },
    Disk { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
    /// The unit torus `[0,1)^2` with wrap-around.
    TorusSquare,
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Interval { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Domain::Disk { center, radius } => {
                radius.is_finite() && radius > 0.0 && center.iter().all(|c| c.is_finite())
            }
            Domain::Rect { min, max } => {
                min.iter().chain(max.iter()).all(|c| c.is_finite()) && min[0] < max[0] && min[1] < max[1]
            }
            Domain::TorusSquare => true,
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::BadRegionSpec(format!("{self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Domain::TorusSquare)
    }

    /// Membership with an absolute slack `tol` (0 for the exact predicate).
    pub fn contains_with(&self, x: Point, tol: f64) -> bool {
        match *self {
            Domain::Interval { lo, hi } => lo - tol <= x[0] && x[0] < hi + tol,
            Domain::Disk { center, radius } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                (dx * dx + dy * dy).sqrt() <= radius + tol
            }
            Domain::Rect { min, max } => {
                min[0] - tol <= x[0] && x[0] < max[0] + tol && min[1] - tol <= x[1] && x[1] < max[1] + tol
            }
            Domain::TorusSquare => (0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1]),
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        self.contains_with(x, 0.0)
    }

    /// `(min, max)` corners; the second coordinate is `[0, 0]` in 1D.
    pub fn bbox(&self) -> (Point, Point) {
        match *self {
            Domain::Interval { lo, hi } => ([lo, 0.0], [hi, 0.0]),
            Domain::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Domain::Rect { min, max } => (min, max),
            Domain::TorusSquare => ([0.0, 0.0], [1.0, 1.0]),
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi[0] - lo[0]).max(hi[1] - lo[1])
    }

    /// Lebesgue measure (length in 1D, area in 2D).
    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Domain::Rect { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
            Domain::TorusSquare => 1.0,
        }
    }

    /// Nearest point of the closed domain, pulled inward by a relative `1e-12`.
    pub fn project(&self, x: Point) -> Point {
        match *self {
            Domain::Interval { lo, hi } => {
                let eps = 1e-12 * (hi - lo);
                [x[0].clamp(lo, hi - eps), x[1]]
            }
            Domain::Disk { center, radius } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                let r = dx.hypot(dy);
                if r <= radius {
                    x
                } else {
                    let s = radius * (1.0 - 1e-12) / r;
                    [center[0] + dx * s, center[1] + dy * s]
                }
            }
            Domain::Rect { min, max } => {
                let eps = 1e-12 * (max[0] - min[0]).max(max[1] - min[1]);
                [x[0].clamp(min[0], max[0] - eps), x[1].clamp(min[1], max[1] - eps)]
            }
            Domain::TorusSquare => [wrap01(x[0]), wrap01(x[1])],
        }
    }

    /// Wraps into the fundamental square on the torus; identity elsewhere.
    #[inline]
    pub fn wrap(&self, x: Point) -> Point {
        if self.is_torus() {
            [wrap01(x[0]), wrap01(x[1])]
        } else {
            x
        }
    }
}

#[inline]
pub fn wrap01(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_rect_wraps() {
        let r = Primitive::TorusRect {
            corner: [0.8, 0.9],
            size: [0.4, 0.2],
        };
        assert!(r.contains([0.1, 0.05]));
        assert!(r.contains([0.85, 0.95]));
        assert!(!r.contains([0.3, 0.05]));
        assert!(!r.contains([0.1, 0.15]));
    }

    #[test]
    fn projection_lands_inside() {
        let d = Domain::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        assert!(d.contains(d.project([3.0, 4.0])));
        assert_eq!(d.project([0.1, 0.2]), [0.1, 0.2]);
        let r = Domain::Rect {
            min: [0.0, 0.0],
            max: [1.0, 2.0],
        };
        assert!(r.contains(r.project([1.5, -1.0])));
    }

    #[test]
    fn interval_half_open() {
        let p = Primitive::Interval {
            lo: 0.0,
            hi: 0.6,
            hi_closed: false,
        };
        assert!(p.contains([0.0, 0.0]));
        assert!(!p.contains([0.6, 0.0]));
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(Domain::Disk {
            center: [0.0, 0.0],
            radius: -1.0
        }
        .validate()
        .is_err());
        assert!(Piece::new(vec![Primitive::Rect {
            min: [0.0, 0.0],
            max: [0.0, 1.0]
        }])
        .is_err());
    }
}
