//! Piecewise translation maps, orbits, fates and their linear invariants.

pub mod alpha;
pub mod exact;
pub mod fate;
pub mod generate;
pub mod map;
pub mod relation;
pub mod semiconj;

pub use alpha::{alpha_coefficients, alpha_coefficients_exact, alpha_tolerance, AlphaVector};
pub use exact::{ExactOrbitStats, IntervalMap};
pub use generate::{random_disk_map, random_interval_pwt, random_rational_interval_map, sector_disk_map};
pub use fate::{detect_periodic_fate, witness_residual, witness_sum_exact, FateVerdict};
pub use map::{Itinerary, MapValidation, OrbitStats, PwtMap};
pub use relation::{rational_independence_check, IndependenceVerdict, DEPENDENCE_TOL};
pub use semiconj::{semiconjugacy_defects_exact, semiconjugacy_residual};
