//! Set iteration, stabilization detection and attractor invariants.

pub mod iterate;
pub mod measure;

pub use iterate::{
    forward_images_exact, forward_images_raster, CellMap, ExactRun, IterateRecord, IterationTrace, RasterRun, Status,
    DEFAULT_N_MAX,
};
pub use measure::{
    attractor_pieces_exact, attractor_pieces_raster, covering_number, diagram, fiber_count, resolve_ell, tiling_check,
    visit_frequency_report, AttractorReport, CoveringReport, PieceMeasure, SetRep, TilingReport, VisitFrequencyReport,
    ELL_TOLERANCE,
};
