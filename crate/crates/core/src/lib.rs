//! Simulation and verification laboratory for piecewise translation maps.
//!
//! Iterates sets and orbits of maps `F(x) = x + v_i` (piecewise constant
//! translations), detects finite-type stabilization, measures attractors and
//! their torus-factor invariants, and runs deterministic and random double
//! rotations of the circle and torus.

pub mod attractor;
pub mod circle;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod pwt;
pub mod torus;

pub use error::{LabError, Result};
