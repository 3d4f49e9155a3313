//! Experiment configuration: one TOML file, unknown keys rejected.
//!
//! ```toml
//! mode = "iterate"
//! seed = 7
//!
//! [map]
//! kind = "interval"
//! lo = "0"
//! hi = "1"
//! cuts = ["3/5"]
//! vectors = ["3/10", "-3/5"]
//!
//! [run]
//! n_max = 100
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{parse_rational, Domain, Piece, Point, Rational};
use crate::pwt::{sector_disk_map, IntervalMap, PwtMap};
use crate::torus::{SkewProductMap, TorusDoubleRotation, TorusMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Validate,
    Iterate,
    Attractor,
    Alpha,
    RandomDr,
    ArcItinerary,
    Sweep,
    Render,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Validate,
        Mode::Iterate,
        Mode::Attractor,
        Mode::Alpha,
        Mode::RandomDr,
        Mode::ArcItinerary,
        Mode::Sweep,
        Mode::Render,
    ];

    /// Inverse of [`Mode::name`].
    pub fn from_name(name: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Validate => "validate",
            Mode::Iterate => "iterate",
            Mode::Attractor => "attractor",
            Mode::Alpha => "alpha",
            Mode::RandomDr => "random-dr",
            Mode::ArcItinerary => "arc-itinerary",
            Mode::Sweep => "sweep",
            Mode::Render => "render",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Mode for `pwt-lab run`; a mode subcommand takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default)]
    pub run: RunParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<CircleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// The map under study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// Float map with explicit pieces.
    Pwt {
        domain: Domain,
        pieces: Vec<Piece>,
        vectors: Vec<Point>,
    },
    /// Exact map on `[lo, hi)`; numbers are `"p/q"` or decimal strings.
    Interval {
        lo: String,
        hi: String,
        cuts: Vec<String>,
        vectors: Vec<String>,
    },
    /// Three sectors of the unit disk around `apex`.
    SectorDisk {
        apex: Point,
        rays: [f64; 3],
        vectors: [Point; 3],
    },
    TorusDoubleRotation {
        corner: Point,
        size: Point,
        gamma1: Point,
        gamma2: Point,
    },
    SkewProduct {
        base_angle: f64,
        fiber_alpha: f64,
        fiber_beta: f64,
        /// Defaults to `1 - fiber_alpha`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fiber_delta: Option<f64>,
    },
}

/// A map built from its spec.
#[derive(Clone, Debug)]
pub enum BuiltMap {
    Float(PwtMap),
    Exact(IntervalMap),
    Torus(TorusMap),
}

impl BuiltMap {
    /// The float form used for sampling, orbits and alpha.
    pub fn pwt(&self) -> Result<PwtMap> {
        match self {
            BuiltMap::Float(m) => Ok(m.clone()),
            BuiltMap::Exact(m) => Ok(m.to_pwt_map()),
            BuiltMap::Torus(t) => t.to_pwt_map(),
        }
    }
}

fn rationals(items: &[String]) -> Result<Vec<Rational>> {
    items.iter().map(|s| parse_rational(s)).collect()
}

impl MapSpec {
    pub fn build(&self) -> Result<BuiltMap> {
        Ok(match self {
            MapSpec::Pwt { domain, pieces, vectors } => {
                let pieces = pieces.iter().map(|p| Piece::new(p.0.clone())).collect::<Result<Vec<_>>>()?;
                BuiltMap::Float(PwtMap::new(domain.clone(), pieces, vectors.clone())?)
            }
            MapSpec::Interval { lo, hi, cuts, vectors } => BuiltMap::Exact(IntervalMap::new(
                parse_rational(lo)?,
                parse_rational(hi)?,
                rationals(cuts)?,
                rationals(vectors)?,
            )?),
            MapSpec::SectorDisk { apex, rays, vectors } => BuiltMap::Float(sector_disk_map(*apex, *rays, *vectors)?),
            MapSpec::TorusDoubleRotation {
                corner,
                size,
                gamma1,
                gamma2,
            } => BuiltMap::Torus(TorusMap::DoubleRotation(TorusDoubleRotation::new(
                *corner, *size, *gamma1, *gamma2,
            )?)),
            MapSpec::SkewProduct {
                base_angle,
                fiber_alpha,
                fiber_beta,
                fiber_delta,
            } => {
                let m = match fiber_delta {
                    Some(d) => SkewProductMap::new(*base_angle, *fiber_alpha, *fiber_beta, *d)?,
                    None => SkewProductMap::from_partition(*base_angle, *fiber_alpha, *fiber_beta)?,
                };
                BuiltMap::Torus(TorusMap::SkewProduct(m))
            }
        })
    }

    /// Copy with translation parameter `(vector, component)` set to `value`.
    ///
    /// For `torus_double_rotation`, vector 0 is `gamma2` and vector 1 is `gamma1`.
    /// For `skew_product`, vector 0 is `(base_angle, fiber_alpha)` and vector 1
    /// is `(fiber_beta, fiber_delta)`.
    pub fn with_parameter(&self, vector: usize, component: usize, value: Rational) -> Result<MapSpec> {
        let f = crate::geometry::Scalar::to_f64(value);
        let bad = || LabError::Config(format!("map has no sweepable parameter ({vector}, {component})"));
        if component > 1 {
            return Err(bad());
        }
        let mut out = self.clone();
        match &mut out {
            MapSpec::Pwt { vectors, .. } => *vectors.get_mut(vector).ok_or_else(bad)?.get_mut(component).ok_or_else(bad)? = f,
            MapSpec::SectorDisk { vectors, .. } => {
                *vectors.get_mut(vector).ok_or_else(bad)?.get_mut(component).ok_or_else(bad)? = f
            }
            MapSpec::Interval { vectors, .. } => {
                if component != 0 {
                    return Err(bad());
                }
                *vectors.get_mut(vector).ok_or_else(bad)? = crate::geometry::format_rational(&value);
            }
            MapSpec::TorusDoubleRotation { gamma1, gamma2, .. } => match vector {
                0 => gamma2[component] = f,
                1 => gamma1[component] = f,
                _ => return Err(bad()),
            },
            MapSpec::SkewProduct {
                base_angle,
                fiber_alpha,
                fiber_beta,
                fiber_delta,
            } => match (vector, component) {
                (0, 0) => *base_angle = f,
                (0, 1) => *fiber_alpha = f,
                (1, 0) => *fiber_beta = f,
                (1, 1) => *fiber_delta = Some(f),
                _ => return Err(bad()),
            },
        }
        Ok(out)
    }
}

/// Numeric knobs shared by the map modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunParams {
    /// Cell size: relative to the domain diameter on flat domains, absolute on the torus.
    pub h: f64,
    pub n_max: usize,
    /// Orbit length for visit frequencies.
    pub k: u64,
    /// Samples for sampled map validation.
    pub n_points: usize,
    /// Probes for the covering number.
    pub probes: usize,
    pub tiling_window: usize,
    pub tiling_per_side: usize,
    /// Iterates saved as images.
    pub snapshots: Vec<usize>,
    /// Snap torus parameters to the grid before iterating.
    pub commensurate: bool,
    /// Orbit start; a seeded point of the domain when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<Point>,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            h: 1.0 / 1024.0,
            n_max: crate::attractor::DEFAULT_N_MAX,
            k: 1_000_000,
            n_points: 100_000,
            probes: 2000,
            tiling_window: 3,
            tiling_per_side: 64,
            snapshots: Vec::new(),
            commensurate: false,
            start: None,
        }
    }
}

/// Circle double rotation `T_2` and the rotation `T_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    pub alpha: String,
    pub beta: String,
    pub delta: String,
    /// Angle of `T_1`; defaults to `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<String>,
    /// Probability of `T_1`.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Seeded runs `seed, seed + 1, ...`.
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_arc_cap")]
    pub arc_cap: usize,
    /// Target arc `[start, start + len)`; drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_len: Option<String>,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_p() -> f64 {
    0.5
}
fn default_n() -> usize {
    5000
}
fn default_runs() -> usize {
    1
}
fn default_eps() -> Vec<f64> {
    vec![1e-2]
}
fn default_bins() -> usize {
    64
}
fn default_arc_cap() -> usize {
    crate::circle::DEFAULT_ARC_CAP
}
fn default_budget() -> u64 {
    crate::circle::DEFAULT_BUDGET
}

/// One swept translation component; values run from `lo` to `hi` in `steps` equal steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub vector: usize,
    #[serde(default)]
    pub component: usize,
    pub lo: String,
    pub hi: String,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Result<Vec<Rational>> {
        let (lo, hi) = (parse_rational(&self.lo)?, parse_rational(&self.hi)?);
        if self.steps == 0 {
            return Err(LabError::Config("sweep axis needs at least one step".into()));
        }
        if self.steps == 1 {
            return Ok(vec![lo]);
        }
        let n = Rational::from_integer(self.steps as i128 - 1);
        Ok((0..self.steps)
            .map(|i| lo + (hi - lo) * Rational::from_integer(i as i128) / n)
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<SweepAxis>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Checks every knob before anything runs.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        let cfg = |m: String| Err(LabError::Config(m));
        let r = &self.run;
        if !(r.h.is_finite() && r.h > 0.0 && r.h <= 1.0) {
            return cfg(format!("run.h must lie in (0, 1], got {}", r.h));
        }
        if r.n_max == 0 {
            return cfg("run.n_max must be at least 1".into());
        }
        if r.k == 0 || r.n_points == 0 || r.probes == 0 || r.tiling_window == 0 || r.tiling_per_side == 0 {
            return cfg("run.k, n_points, probes, tiling_window and tiling_per_side must be positive".into());
        }
        if self.threads == Some(0) {
            return cfg("threads must be positive".into());
        }
        let needs_map = matches!(
            mode,
            Mode::Validate | Mode::Iterate | Mode::Attractor | Mode::Alpha | Mode::Sweep
        );
        let needs_circle = matches!(mode, Mode::RandomDr | Mode::ArcItinerary);
        if needs_map && self.map.is_none() {
            return cfg(format!("mode {} needs a [map] section", mode.name()));
        }
        if mode == Mode::Render && self.map.is_none() && self.circle.is_none() {
            return cfg("mode render needs a [map] or [circle] section".into());
        }
        if let Some(MapSpec::Interval { lo, hi, cuts, vectors }) = &self.map {
            parse_rational(lo)?;
            parse_rational(hi)?;
            rationals(cuts)?;
            rationals(vectors)?;
        }
        if needs_circle && self.circle.is_none() {
            return cfg(format!("mode {} needs a [circle] section", mode.name()));
        }
        if let Some(c) = &self.circle {
            for s in [&c.alpha, &c.beta, &c.delta].into_iter().chain(&c.rotation).chain(&c.target_start).chain(&c.target_len) {
                parse_rational(s)?;
            }
            if !(0.0..=1.0).contains(&c.p) {
                return cfg(format!("circle.p must lie in [0, 1], got {}", c.p));
            }
            if c.n == 0 || c.runs == 0 || c.bins == 0 {
                return cfg("circle.n, runs and bins must be positive".into());
            }
            if c.target_start.is_some() != c.target_len.is_some() {
                return cfg("circle.target_start and target_len go together".into());
            }
        }
        if mode == Mode::Sweep {
            let Some(s) = &self.sweep else {
                return cfg("mode sweep needs a [sweep] section".into());
            };
            if s.axes.is_empty() || s.axes.len() > 2 {
                return cfg(format!("sweep takes 1 or 2 axes, got {}", s.axes.len()));
            }
            for a in &s.axes {
                a.values()?;
            }
        }
        Ok(())
    }
}
