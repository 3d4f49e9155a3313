use thiserror::Error;

/// Every failure the lab can report. `code()` gives the module-qualified
/// identifier written into machine-readable error records.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("translation vectors are rank deficient (|det| = {det:e}, tolerance {tolerance:e})")]
    RankDeficient { det: f64, tolerance: f64 },
    #[error("bad region specification: {0}")]
    BadRegionSpec(String),
    #[error("point {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),
    #[error("piece {piece} maps {point:?} outside the domain")]
    MapsOutside { piece: usize, point: Vec<f64> },
    #[error("no bounded piecewise translation exists for these vectors (alpha = {0:?})")]
    NoBoundedDynamics(Vec<f64>),
    #[error("itinerary too short for periodicity detection (length {0}, need at least 6)")]
    TooShort(usize),
    #[error("attractor requested from a run that did not stabilize")]
    NotStabilized,
    #[error("arc count {count} exceeded cap {cap}")]
    ArcExplosion { count: usize, cap: usize },
    #[error("itinerary synthesis failed: {0}")]
    SynthesisFailed(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    pub fn code(&self) -> &'static str {
        match self {
            LabError::RankDeficient { .. } => "geometry.rank_deficient",
            LabError::BadRegionSpec(_) => "geometry.bad_region_spec",
            LabError::OutsideDomain(_) => "pwt_core.outside_domain",
            LabError::MapsOutside { .. } => "pwt_core.maps_outside",
            LabError::NoBoundedDynamics(_) => "pwt_core.no_bounded_dynamics",
            LabError::TooShort(_) => "pwt_core.too_short",
            LabError::NotStabilized => "attractor_engine.not_stabilized",
            LabError::ArcExplosion { .. } => "circle_lab.arc_explosion",
            LabError::SynthesisFailed(_) => "circle_lab.synthesis_failed",
            LabError::InvalidMap(_) => "pwt_core.invalid_map",
            LabError::Config(_) => "cli.config_error",
            LabError::Io(_) => "cli.io_error",
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
