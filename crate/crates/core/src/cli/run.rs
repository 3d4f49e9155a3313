//! Mode dispatch: each mode turns a validated config into a report and artifacts.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::artifacts::{grid_pgm, histogram_pgm, Artifact};
use super::config::{BuiltMap, CircleSpec, ExperimentConfig, Mode, RunParams};
use super::sweep::sweep;
use crate::attractor::{
    attractor_pieces_exact, attractor_pieces_raster, covering_number, forward_images_exact, forward_images_raster,
    resolve_ell, tiling_check, visit_frequency_report, CoveringReport, ExactRun, IterationTrace, PieceMeasure,
    RasterRun, SetRep, Status, TilingReport, VisitFrequencyReport,
};
use crate::circle::{
    arc_itinerary, attractor_histogram, fmt17, random_compose, DoubleRotation, RandomComposeParams, RandomRun,
    RNG_ALGORITHM,
};
use crate::error::{LabError, Result};
use crate::geometry::{
    format_rational, lattice_from_vectors, parse_rational, ArcUnion, OccupancyGrid, Point, Rational, Scalar,
};
use crate::pwt::{
    alpha_coefficients, alpha_coefficients_exact, rational_independence_check, AlphaVector, IndependenceVerdict,
    IntervalMap, MapValidation, PwtMap,
};
use crate::torus::{grid_side, torus_forward_images};

/// Coefficient bound for the independence verdict in reports.
const REPORT_INDEPENDENCE_BOUND: u64 = 1000;
const HISTOGRAM_HEIGHT: usize = 256;

/// Machine-readable error: module-qualified code plus message.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub code: String,
    pub message: String,
}

impl From<&LabError> for ErrorRecord {
    fn from(e: &LabError) -> Self {
        Self {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

/// Everything a run produces; `report.json` is always the first artifact.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

pub(crate) fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| LabError::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner().map_err(|e| LabError::Io(e.to_string()))
}

/// Validates and runs `config` in `mode`.
pub fn run(config: &ExperimentConfig, mode: Mode) -> Result<Outcome> {
    config.validate(mode)?;
    let (report, mut artifacts) = match mode {
        Mode::Validate => validate(config)?,
        Mode::Alpha => alpha(config)?,
        Mode::Iterate => iterate(config)?,
        Mode::Attractor => attractor(config)?,
        Mode::RandomDr => random_dr(config)?,
        Mode::ArcItinerary => itinerary(config)?,
        Mode::Sweep => sweep(config)?,
        Mode::Render => render(config)?,
    };
    let mut all = vec![Artifact::json("report.json", &report)?];
    all.append(&mut artifacts);
    Ok(Outcome { report, artifacts: all })
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| LabError::Io(e.to_string()))
}

fn built(config: &ExperimentConfig) -> Result<BuiltMap> {
    config.map.as_ref().expect("validated").build()
}

/// Seeded point of the domain (rejection sampling in the bounding box).
fn seeded_start(map: &PwtMap, seed: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = map.domain().bbox();
    loop {
        let x = [rng.gen_range(lo[0]..hi[0]), if map.dim() == 2 { rng.gen_range(lo[1]..hi[1]) } else { 0.0 }];
        if map.domain().contains(x) && map.piece_of(x).is_some() {
            return x;
        }
    }
}

#[derive(Serialize)]
struct AlphaReport {
    mode: &'static str,
    alphas: Option<AlphaVector>,
    exact_alphas: Option<Vec<String>>,
    error: Option<ErrorRecord>,
}

fn alpha_report(b: &BuiltMap) -> Result<AlphaReport> {
    let m = b.pwt()?;
    let (alphas, error) = match alpha_coefficients(m.dim(), m.vectors()) {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(ErrorRecord::from(&e))),
    };
    let exact_alphas = match b {
        BuiltMap::Exact(x) => alpha_coefficients_exact(x.vectors())
            .ok()
            .map(|v| v.iter().map(format_rational).collect()),
        _ => None,
    };
    Ok(AlphaReport {
        mode: "alpha",
        alphas,
        exact_alphas,
        error,
    })
}

fn alpha(config: &ExperimentConfig) -> Result<(serde_json::Value, Vec<Artifact>)> {
    let r = alpha_report(&built(config)?)?;
    Ok((to_value(&r)?, Vec::new()))
}

#[derive(Serialize)]
struct ValidateReport {
    mode: &'static str,
    dim: usize,
    pieces: usize,
    sampling: MapValidation,
    valid: bool,
    independence: IndependenceVerdict,
    alphas: Option<AlphaVector>,
    alpha_error: Option<ErrorRecord>,
}

fn validate(config: &ExperimentConfig) -> Result<(serde_json::Value, Vec<Artifact>)> {
    let b = built(config)?;
    let m = b.pwt()?;
    let sampling = m.validate_sampled(config.run.n_points, config.seed);
    let a = alpha_report(&b)?;
    let r = ValidateReport {
        mode: "validate",
        dim: m.dim(),
        pieces: m.m(),
        valid: sampling.is_valid(0.0),
        sampling,
        independence: rational_independence_check(m.dim(), m.vectors(), REPORT_INDEPENDENCE_BOUND),
        alphas: a.alphas,
        alpha_error: a.error,
    };
    Ok((to_value(&r)?, Vec::new()))
}

/// Result of iterating a map from the whole domain.
pub enum Iterated {
    Exact { map: IntervalMap, run: ExactRun },
    Raster { map: PwtMap, run: RasterRun },
}

impl Iterated {
    pub fn trace(&self) -> &IterationTrace {
        match self {
            Iterated::Exact { run, .. } => &run.trace,
            Iterated::Raster { run, .. } => &run.trace,
        }
    }

    pub fn final_measure(&self) -> f64 {
        match self {
            Iterated::Exact { run, .. } => run.set.measure().to_f64(),
            Iterated::Raster { run, .. } => run.grid.measure(),
        }
    }

    /// `Leb A / Leb T` resolved to an integer, when the map has `d + 1` vectors.
    pub fn ell(&self) -> Option<u64> {
        let m = match self {
            Iterated::Exact { map, .. } => map.to_pwt_map(),
            Iterated::Raster { map, .. } => map.clone(),
        };
        if m.is_torus() || m.m() != m.dim() + 1 {
            return None;
        }
        let lattice = lattice_from_vectors(m.dim(), m.vectors()).ok()?;
        resolve_ell(self.final_measure() / lattice.det_abs())
    }
}

/// Iterates the whole domain with the engine matching the map.
pub fn iterate_built(b: &BuiltMap, run: &RunParams) -> Result<Iterated> {
    Ok(match b {
        BuiltMap::Exact(m) => Iterated::Exact {
            map: m.clone(),
            run: forward_images_exact(m, &m.domain_set(), run.n_max)?,
        },
        BuiltMap::Float(m) => Iterated::Raster {
            map: m.clone(),
            run: forward_images_raster(m, run.h, run.n_max, &run.snapshots)?,
        },
        BuiltMap::Torus(t) => {
            let t = if run.commensurate { t.snapped(grid_side(run.h)?)? } else { *t };
            Iterated::Raster {
                map: t.to_pwt_map()?,
                run: torus_forward_images(&t, run.h, run.n_max, &run.snapshots, false)?,
            }
        }
    })
}

#[derive(Serialize)]
struct IterateReport {
    mode: &'static str,
    status: Status,
    stabilized_at: Option<usize>,
    n_max: usize,
    h: Option<f64>,
    final_measure: f64,
    /// Exact mode only.
    final_measure_exact: Option<String>,
    attractor_intervals: Option<Vec<[String; 2]>>,
    grid: Option<[usize; 2]>,
    occupied_cells: Option<usize>,
}

fn intervals(set: &ArcUnion<Rational>) -> Vec<[String; 2]> {
    set.arcs().iter().map(|(a, b)| [format_rational(a), format_rational(b)]).collect()
}

fn iterate_report(it: &Iterated, mode: &'static str, n_max: usize) -> IterateReport {
    let t = it.trace();
    let (exact, ivs, grid, occ) = match it {
        Iterated::Exact { run, .. } => (Some(format_rational(&run.set.measure())), Some(intervals(&run.set)), None, None),
        Iterated::Raster { run, .. } => (None, None, Some([run.grid.nx, run.grid.ny]), Some(run.grid.occupied_count())),
    };
    IterateReport {
        mode,
        status: t.status,
        stabilized_at: t.stabilized_at,
        n_max,
        h: t.h,
        final_measure: it.final_measure(),
        final_measure_exact: exact,
        attractor_intervals: ivs,
        grid,
        occupied_cells: occ,
    }
}

fn trace_csv(it: &Iterated) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = match it {
        Iterated::Exact { run, .. } => run
            .trace
            .records
            .iter()
            .zip(&run.measures)
            .map(|(r, m)| vec![r.n.to_string(), format_rational(m), r.occupied.to_string(), r.changed.to_string()])
            .collect(),
        Iterated::Raster { run, .. } => run
            .trace
            .records
            .iter()
            .map(|r| vec![r.n.to_string(), fmt17(r.measure), r.occupied.to_string(), r.changed.to_string()])
            .collect(),
    };
    csv_bytes(&["n", "measure", "occupied", "changed"], rows)
}

/// Cells of side `h * |domain|` whose centers lie in `set`.
fn rasterize_line(set: &ArcUnion<Rational>, lo: f64, hi: f64, h: f64) -> OccupancyGrid {
    let n = (1.0 / h).round().max(1.0) as usize;
    let cell = (hi - lo) / n as f64;
    let mut g = OccupancyGrid::new([lo, -0.5 * cell], cell, n, 1, false);
    for i in 0..n {
        if SetRep::contains(set, [lo + (i as f64 + 0.5) * cell, 0.0]) {
            g.set(i, true);
        }
    }
    g
}

fn images(it: &Iterated, h: f64) -> Vec<Artifact> {
    match it {
        Iterated::Exact { map, run } => {
            let g = rasterize_line(&run.set, map.lo().to_f64(), map.hi().to_f64(), h);
            vec![Artifact::new("attractor.pgm", grid_pgm(&g))]
        }
        Iterated::Raster { run, .. } => {
            let mut out = vec![Artifact::new("attractor.pgm", grid_pgm(&run.grid))];
            for (n, g) in &run.snapshots {
                out.push(Artifact::new(format!("snapshot_{n:05}.pgm"), grid_pgm(g)));
            }
            out
        }
    }
}

fn iterate(config: &ExperimentConfig) -> Result<(serde_json::Value, Vec<Artifact>)> {
    let it = iterate_built(&built(config)?, &config.run)?;
    let report = iterate_report(&it, "iterate", config.run.n_max);
    let mut arts = vec![Artifact::new("trace.csv", trace_csv(&it)?)];
    arts.extend(images(&it, config.run.h));
    Ok((to_value(&report)?, arts))
}

#[derive(Serialize)]
struct AttractorModeReport {
    #[serde(flatten)]
    iterate: IterateReport,
    alphas: Option<AlphaVector>,
    exact_alphas: Option<Vec<String>>,
    alpha_error: Option<ErrorRecord>,
    pieces: Vec<PieceMeasure>,
    /// Exact piece measures in exact mode.
    pieces_exact: Option<Vec<String>>,
    frequencies: Option<VisitFrequencyReport>,
    lattice_volume: Option<f64>,
    covering: Option<CoveringReport>,
    tiling: Option<TilingReport>,
}

fn attractor(config: &ExperimentConfig) -> Result<(serde_json::Value, Vec<Artifact>)> {
    let b = built(config)?;
    let it = iterate_built(&b, &config.run)?;
    it.trace().require_stabilized()?;
    let r = &config.run;
    let a = alpha_report(&b)?;
    let map = b.pwt()?;
    let (pieces, pieces_exact, set): (Vec<PieceMeasure>, Option<Vec<String>>, &dyn SetRep) = match &it {
        Iterated::Exact { map: m, run } => {
            let parts = attractor_pieces_exact(m, &run.set);
            let total = run.set.measure();
            let pm = parts
                .iter()
                .enumerate()
                .map(|(piece, (_, mu))| PieceMeasure {
                    piece,
                    measure: mu.to_f64(),
                    normalized: if total > Rational::from_integer(0) { (*mu / total).to_f64() } else { 0.0 },
                })
                .collect();
            (pm, Some(parts.iter().map(|(_, mu)| format_rational(mu)).collect()), &run.set)
        }
        Iterated::Raster { map: m, run } => (attractor_pieces_raster(&run.cell_map, &run.grid, m.m()), None, &run.grid),
    };
    let frequencies = if a.alphas.is_some() {
        let x = r.start.unwrap_or_else(|| seeded_start(&map, config.seed));
        Some(visit_frequency_report(&map, x, r.k)?)
    } else {
        None
    };
    let lattice = (!map.is_torus() && map.m() == map.dim() + 1)
        .then(|| lattice_from_vectors(map.dim(), map.vectors()).ok())
        .flatten();
    let (covering, tiling) = match &lattice {
        Some(l) => (
            Some(covering_number(set, l, r.probes, config.seed)),
            Some(tiling_check(set, l, r.tiling_window, r.tiling_per_side)),
        ),
        None => (None, None),
    };
    let report = AttractorModeReport {
        iterate: iterate_report(&it, "attractor", r.n_max),
        alphas: a.alphas,
        exact_alphas: a.exact_alphas,
        alpha_error: a.error,
        pieces,
        pieces_exact,
        frequencies,
        lattice_volume: lattice.as_ref().map(|l| l.det_abs()),
        covering,
        tiling,
    };
    let mut arts = vec![Artifact::new("trace.csv", trace_csv(&it)?)];
    arts.extend(images(&it, r.h));
    Ok((to_value(&report)?, arts))
}

fn circle_maps(config: &ExperimentConfig) -> Result<(Rational, DoubleRotation<Rational>)> {
    let c = config.circle.as_ref().expect("validated");
    let t2 = DoubleRotation::new(parse_rational(&c.alpha)?, parse_rational(&c.beta)?, parse_rational(&c.delta)?)?;
    let rot = match &c.rotation {
        Some(s) => parse_rational(s)?,
        None => t2.alpha,
    };
    Ok((rot, t2))
}

#[derive(Serialize)]
struct RandomDrReport {
    mode: &'static str,
    rng: &'static str,
    p: f64,
    n: usize,
    seeds: Vec<u64>,
    all_monotone: bool,
    /// `(eps, runs with measure below eps by step n)`.
    reached: Vec<(f64, usize)>,
    runs: Vec<RandomRunSummary>,
}

#[derive(Serialize)]
struct RandomRunSummary {
    seed: u64,
    final_measure: String,
    first_below: Vec<(f64, Option<usize>)>,
    max_arcs: usize,
}

fn random_runs(config: &ExperimentConfig, keep_first_tail: bool) -> Result<Vec<RandomRun>> {
    let c = config.circle.as_ref().expect("validated");
    let (rot, t2) = circle_maps(config)?;
    (0..c.runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut p = RandomComposeParams::new(c.p, config.seed.wrapping_add(i), c.n);
            p.eps_list = c.eps.clone();
            p.arc_cap = c.arc_cap;
            p.keep_tail = keep_first_tail && i == 0;
            random_compose(rot, &t2, &p)
        })
        .collect()
}

fn random_dr(config: &ExperimentConfig) -> Result<(serde_json::Value, Vec<Artifact>)> {
    let c = config.circle.as_ref().expect("validated");
    let runs = random_runs(config, true)?;
    let mut header = vec!["seed".to_string(), "final_measure".into(), "max_arcs".into()];
    header.extend(c.eps.iter().map(|e| format!("first_below_{}", fmt17(*e))));
    let rows = runs.iter().map(|r| {
        let mut row = vec![r.seed.to_string(), format_rational(&r.final_measure()), r.max_arcs.to_string()];
        row.extend(r.first_below.iter().map(|(_, f)| f.map_or(String::new(), |n| n.to_string())));
        row
    });
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let summary = csv_bytes(&header_refs, rows)?;
    let mut trace = Vec::new();
    runs[0].write_csv(&mut trace)?;
    let hist = attractor_histogram(&runs[0], c.bins)?;
    let mut hist_csv = Vec::new();
    hist.write_csv(&mut hist_csv)?;
    let reached = c
        .eps
        .iter()
        .enumerate()
        .map(|(k, &e)| (e, runs.iter().filter(|r| r.first_below[k].1.is_some()).count()))
        .collect();
    let report = RandomDrReport {
        mode: "random-dr",
        rng: RNG_ALGORITHM,
        p: c.p,
        n: c.n,
        seeds: runs.iter().map(|r| r.seed).collect(),
        all_monotone: runs.iter().all(|r| r.is_monotone()),
        reached,
        runs: runs
            .iter()
            .map(|r| RandomRunSummary {
                seed: r.seed,
                final_measure: format_rational(&r.final_measure()),
                first_below: r.first_below.clone(),
                max_arcs: r.max_arcs,
            })
            .collect(),
    };
    Ok((
        to_value(&report)?,
        vec![
            Artifact::new("summary.csv", summary),
            Artifact::new("trace.csv", trace),
            Artifact::new("histogram.csv", hist_csv),
            Artifact::new("histogram.pgm", histogram_pgm(&hist, HISTOGRAM_HEIGHT)),
        ],
    ))
}

/// Seeded target arc with denominator `1000003` and length in `[0.01, 0.2)`.
pub fn seeded_target(seed: u64) -> (Rational, Rational) {
    const Q: i128 = 1_000_003;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Rational::new(rng.gen_range(0..Q), Q);
    let len = Rational::new(rng.gen_range(Q / 100..Q / 5), Q);
    (start, len)
}

#[derive(Serialize)]
struct ItineraryReport {
    mode: &'static str,
    target_start: String,
    target_len: String,
    length: u64,
    runs: Vec<(u8, u64)>,
    image: Vec<[String; 2]>,
    verified: bool,
}

fn itinerary(config: &ExperimentConfig) -> Result<(serde_json::Value, Vec<Artifact>)> {
    let c = config.circle.as_ref().expect("validated");
    let (_, t2) = circle_maps(config)?;
    let (start, len) = match (&c.target_start, &c.target_len) {
        (Some(s), Some(l)) => (parse_rational(s)?, parse_rational(l)?),
        _ => seeded_target(config.seed),
    };
    let cert = arc_itinerary(&t2, start, len, c.budget)?;
    let report = ItineraryReport {
        mode: "arc-itinerary",
        target_start: format_rational(&start),
        target_len: format_rational(&len),
        length: cert.length,
        runs: cert.runs.clone(),
        image: intervals(&cert.image),
        verified: cert.verified,
    };
    let mut text = Vec::new();
    text.write_all(cert.to_text(&t2).as_bytes())?;
    Ok((to_value(&report)?, vec![Artifact::new("certificate.txt", text)]))
}

#[derive(Serialize)]
struct RenderReport {
    mode: &'static str,
    source: &'static str,
    images: Vec<String>,
}

fn render(config: &ExperimentConfig) -> Result<(serde_json::Value, Vec<Artifact>)> {
    let (source, arts) = if config.map.is_some() {
        let it = iterate_built(&built(config)?, &config.run)?;
        ("map", images(&it, config.run.h))
    } else {
        let c = config.circle.as_ref().expect("validated");
        let runs = random_runs(&ExperimentConfig {
            circle: Some(CircleSpec { runs: 1, ..c.clone() }),
            ..config.clone()
        }, true)?;
        let hist = attractor_histogram(&runs[0], c.bins)?;
        ("circle", vec![Artifact::new("histogram.pgm", histogram_pgm(&hist, HISTOGRAM_HEIGHT))])
    };
    let report = RenderReport {
        mode: "render",
        source,
        images: arts.iter().map(|a| a.name.clone()).collect(),
    };
    Ok((to_value(&report)?, arts))
}
