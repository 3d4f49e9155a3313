//! Vectors, lattices, exact interval/arc unions and occupancy grids.

mod arc;
mod grid;
mod lattice;
mod region;
mod scalar;

pub use arc::ArcUnion;
pub use grid::{set_approx_from_region, OccupancyGrid, SetApprox};
pub use lattice::{lattice_from_vectors, norm, reduce_to_fundamental, Lattice, RANK_TOL};
pub use region::{in_arc, wrap01, Domain, Piece, Primitive};
pub use scalar::{
    common_denominator, format_rational, parse_rational, rat, snap_to_denominator, Rational, Scalar,
};

/// A point or vector; 1D quantities use the first coordinate and keep the second at 0.
pub type Point = [f64; 2];
