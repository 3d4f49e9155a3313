//! Double rotations of the circle, their random compositions, and arc itineraries.

pub mod itinerary;
pub mod random;
pub mod rotation;

pub use itinerary::{apply_runs, arc_itinerary, ArcCertificate, DEFAULT_BUDGET};
pub use random::{
    attractor_histogram, fmt17, random_compose, Histogram, RandomComposeParams, RandomRun, DEFAULT_ARC_CAP,
    RNG_ALGORITHM,
};
pub use rotation::DoubleRotation;
