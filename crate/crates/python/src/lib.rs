//! Python module `pwtlab`: maps, exact interval maps, double rotations and
//! config-driven runs from `pwt-lab`.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pwt_lab::circle::{self, RandomComposeParams, DEFAULT_BUDGET};
use pwt_lab::cli::{self, presets, BuiltMap, ExperimentConfig, Iterated, Mode, RunParams};
use pwt_lab::geometry::{format_rational, parse_rational, ArcUnion, Point, Rational};
use pwt_lab::pwt::{self, detect_periodic_fate};
use pwt_lab::LabError;

create_exception!(pwtlab, PwtLabError, PyException);

fn err(e: LabError) -> PyErr {
    PwtLabError::new_err(format!("{}: {e}", e.code()))
}

fn parse(s: &str) -> PyResult<Rational> {
    parse_rational(s).map_err(err)
}

fn parse_all(v: &[String]) -> PyResult<Vec<Rational>> {
    v.iter().map(|s| parse(s)).collect()
}

fn point(x: &[f64]) -> PyResult<Point> {
    match x {
        [a] => Ok([*a, 0.0]),
        [a, b] => Ok([*a, *b]),
        _ => Err(PwtLabError::new_err("points have 1 or 2 coordinates")),
    }
}

fn arcs(u: &ArcUnion<Rational>) -> Vec<(String, String)> {
    u.arcs().iter().map(|(a, b)| (format_rational(a), format_rational(b))).collect()
}

/// Forward images of the whole domain.
#[pyclass(module = "pwtlab", frozen, get_all)]
struct IterateResult {
    /// "Stabilized" or "MaxIterReached".
    status: String,
    stabilized_at: Option<usize>,
    measures: Vec<f64>,
    final_measure: f64,
    /// `Leb A / Leb T` as an integer, for maps with `d + 1` vectors.
    ell: Option<u64>,
    /// Exact attractor intervals `(a, b)` for interval maps.
    intervals: Option<Vec<(String, String)>>,
}

#[pymethods]
impl IterateResult {
    fn __repr__(&self) -> String {
        format!(
            "IterateResult(status={}, stabilized_at={:?}, final_measure={})",
            self.status, self.stabilized_at, self.final_measure
        )
    }
}

impl From<Iterated> for IterateResult {
    fn from(it: Iterated) -> Self {
        let trace = it.trace();
        IterateResult {
            status: format!("{:?}", trace.status),
            stabilized_at: trace.stabilized_at,
            measures: trace.records.iter().map(|r| r.measure).collect(),
            final_measure: it.final_measure(),
            ell: it.ell(),
            intervals: match &it {
                Iterated::Exact { run, .. } => Some(arcs(&run.set)),
                Iterated::Raster { .. } => None,
            },
        }
    }
}

fn iterate(b: &BuiltMap, h: f64, n_max: usize) -> PyResult<IterateResult> {
    let run = RunParams {
        h,
        n_max,
        ..RunParams::default()
    };
    Ok(cli::iterate_built(b, &run).map_err(err)?.into())
}

/// A piecewise translation map in float form (flat domain or torus).
#[pyclass(name = "Map", module = "pwtlab", frozen)]
struct PyMap {
    inner: BuiltMap,
}

#[pymethods]
impl PyMap {
    /// Builds a map from the body of a `[map]` config table.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let cfg = ExperimentConfig::parse(&format!("[map]\n{text}")).map_err(err)?;
        let spec = cfg.map.expect("parsed a [map] table");
        Ok(PyMap {
            inner: spec.build().map_err(err)?,
        })
    }

    /// Seeded random three-sector map of the unit disk.
    #[staticmethod]
    fn random_disk(seed: u64) -> Self {
        PyMap {
            inner: BuiltMap::Float(pwt::random_disk_map(&mut ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    /// Seeded random two-piece map of an interval.
    #[staticmethod]
    fn random_interval(seed: u64) -> Self {
        PyMap {
            inner: BuiltMap::Float(pwt::random_interval_pwt(&mut ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    #[getter]
    fn dim(&self) -> PyResult<usize> {
        Ok(self.inner.pwt().map_err(err)?.dim())
    }

    #[getter]
    fn m(&self) -> PyResult<usize> {
        Ok(self.inner.pwt().map_err(err)?.m())
    }

    /// "float", "exact" or "torus".
    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner {
            BuiltMap::Float(_) => "float",
            BuiltMap::Exact(_) => "exact",
            BuiltMap::Torus(_) => "torus",
        }
    }

    #[getter]
    fn vectors(&self) -> PyResult<Vec<Vec<f64>>> {
        let m = self.inner.pwt().map_err(err)?;
        Ok(m.vectors().iter().map(|v| v[..m.dim()].to_vec()).collect())
    }

    fn step(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let m = self.inner.pwt().map_err(err)?;
        let y = m.step(point(&x)?).map_err(err)?;
        Ok(y[..m.dim()].to_vec())
    }

    /// Weights `alpha_i > 0`, summing to 1, with `sum alpha_i v_i = 0`.
    fn alpha(&self) -> PyResult<Vec<f64>> {
        let m = self.inner.pwt().map_err(err)?;
        Ok(pwt::alpha_coefficients(m.dim(), m.vectors()).map_err(err)?.alphas)
    }

    /// Fraction of the first `k` steps spent in each piece.
    fn visit_frequencies(&self, x: Vec<f64>, k: u64) -> PyResult<Vec<f64>> {
        let m = self.inner.pwt().map_err(err)?;
        let stats = m.orbit_stats(point(&x)?, k).map_err(err)?;
        Ok(stats.visit_counts.iter().map(|&c| c as f64 / k as f64).collect())
    }

    /// Iterates the whole domain: exact for interval maps, raster with cell size `h` otherwise.
    #[pyo3(signature = (h = 1.0 / 1024.0, n_max = 5000))]
    fn iterate(&self, h: f64, n_max: usize) -> PyResult<IterateResult> {
        iterate(&self.inner, h, n_max)
    }

    fn __repr__(&self) -> String {
        match self.inner.pwt() {
            Ok(m) => format!("Map(kind={}, dim={}, m={})", self.kind(), m.dim(), m.m()),
            Err(_) => format!("Map(kind={})", self.kind()),
        }
    }
}

/// A 1D map with rational cut points and translations; all numbers are
/// strings such as "3/10".
#[pyclass(name = "IntervalMap", module = "pwtlab", frozen)]
struct PyIntervalMap {
    inner: pwt::IntervalMap,
}

#[pymethods]
impl PyIntervalMap {
    #[new]
    fn new(lo: &str, hi: &str, cuts: Vec<String>, vectors: Vec<String>) -> PyResult<Self> {
        let inner = pwt::IntervalMap::new(parse(lo)?, parse(hi)?, parse_all(&cuts)?, parse_all(&vectors)?).map_err(err)?;
        Ok(PyIntervalMap { inner })
    }

    /// Seeded random valid map with `m` pieces and denominators up to `max_den`.
    #[staticmethod]
    #[pyo3(signature = (seed, m = 2, max_den = 64))]
    fn random(seed: u64, m: usize, max_den: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PyIntervalMap {
            inner: pwt::random_rational_interval_map(&mut rng, m, max_den),
        }
    }

    #[getter]
    fn bounds(&self) -> Vec<String> {
        self.inner.bounds().iter().map(format_rational).collect()
    }

    #[getter]
    fn vectors(&self) -> Vec<String> {
        self.inner.vectors().iter().map(format_rational).collect()
    }

    fn step(&self, x: &str) -> PyResult<String> {
        Ok(format_rational(&self.inner.step(parse(x)?).map_err(err)?))
    }

    /// Exact forward images of the domain until they stop changing.
    #[pyo3(signature = (n_max = 100_000))]
    fn iterate(&self, n_max: usize) -> PyResult<IterateResult> {
        iterate(&BuiltMap::Exact(self.inner.clone()), 0.0, n_max)
    }

    /// Visit counts over one period when the itinerary of `x` is eventually
    /// periodic within `k` steps.
    fn periodic_witness(&self, x: &str, k: u64) -> PyResult<Option<Vec<u64>>> {
        let (itin, _) = self.inner.orbit(parse(x)?, k).map_err(err)?;
        Ok(detect_periodic_fate(&itin).map_err(err)?.witness().map(|w| w.to_vec()))
    }

    /// `sum counts_i v_i`, exactly.
    fn witness_sum(&self, counts: Vec<u64>) -> String {
        format_rational(&pwt::witness_sum_exact(&counts, self.inner.vectors()))
    }

    /// Steps among the first `k` where `R ∘ π = π ∘ F` fails; 0 for two-piece maps.
    fn semiconjugacy_defects(&self, x: &str, k: u64) -> PyResult<u64> {
        pwt::semiconjugacy_defects_exact(&self.inner, parse(x)?, k).map_err(err)
    }

    fn to_map(&self) -> PyMap {
        PyMap {
            inner: BuiltMap::Exact(self.inner.clone()),
        }
    }

    fn __repr__(&self) -> String {
        format!("IntervalMap(bounds={:?}, vectors={:?})", self.bounds(), self.vectors())
    }
}

/// Itinerary landing the circle in a target arc.
#[pyclass(module = "pwtlab", frozen, get_all)]
struct ArcCertificate {
    /// `(symbol, repeat)` in application order; symbol 1 is the rotation.
    runs: Vec<(u8, u64)>,
    length: u64,
    image: Vec<(String, String)>,
    verified: bool,
    text: String,
}

/// Random composition of the rotation and the double rotation.
#[pyclass(module = "pwtlab", frozen, get_all)]
struct RandomRun {
    measures: Vec<f64>,
    /// Symbol drawn at each step (1 = rotation, 2 = double rotation).
    symbols: Vec<u8>,
    monotone: bool,
    /// `(eps, first n with measure < eps)`.
    first_below: Vec<(f64, Option<usize>)>,
}

/// `T(x) = x + alpha + beta` for `x <= delta`, `x + alpha` otherwise, mod 1,
/// with rational parameters given as strings.
#[pyclass(name = "DoubleRotation", module = "pwtlab", frozen)]
struct PyDoubleRotation {
    inner: circle::DoubleRotation<Rational>,
}

#[pymethods]
impl PyDoubleRotation {
    #[new]
    fn new(alpha: &str, beta: &str, delta: &str) -> PyResult<Self> {
        let inner = circle::DoubleRotation::new(parse(alpha)?, parse(beta)?, parse(delta)?).map_err(err)?;
        Ok(PyDoubleRotation { inner })
    }

    fn apply(&self, x: &str) -> PyResult<String> {
        Ok(format_rational(&self.inner.apply(parse(x)?)))
    }

    /// Itinerary `J` with `T_J(S)` inside `[start, start + length)`, verified exactly.
    #[pyo3(signature = (start, length, budget = DEFAULT_BUDGET))]
    fn arc_itinerary(&self, start: &str, length: &str, budget: u64) -> PyResult<ArcCertificate> {
        let c = circle::arc_itinerary(&self.inner, parse(start)?, parse(length)?, budget).map_err(err)?;
        Ok(ArcCertificate {
            text: c.to_text(&self.inner),
            image: arcs(&c.image),
            runs: c.runs,
            length: c.length,
            verified: c.verified,
        })
    }

    /// `F_n = T_{i_1} ∘ ... ∘ T_{i_n}` with `P(i = 1) = p`; `T_1` is the
    /// rotation by `rotation`, defaulting to `alpha`.
    #[pyo3(signature = (p, seed, n, rotation = None, eps = vec![0.01]))]
    fn random_compose(&self, p: f64, seed: u64, n: usize, rotation: Option<&str>, eps: Vec<f64>) -> PyResult<RandomRun> {
        let t1 = match rotation {
            Some(r) => parse(r)?,
            None => self.inner.alpha,
        };
        let params = RandomComposeParams {
            eps_list: eps,
            ..RandomComposeParams::new(p, seed, n)
        };
        let run = circle::random_compose(t1, &self.inner, &params).map_err(err)?;
        Ok(RandomRun {
            measures: run.measure_trace.iter().map(|m| *m.numer() as f64 / *m.denom() as f64).collect(),
            monotone: run.is_monotone(),
            symbols: run.symbols,
            first_below: run.first_below,
        })
    }
}

/// Weights `alpha` with `sum alpha_i v_i = 0` for `d + 1` vectors in dimension `d`.
#[pyfunction]
fn alpha_coefficients(vectors: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let dim = vectors.first().map_or(0, Vec::len);
    let pts: Vec<Point> = vectors.iter().map(|v| point(v)).collect::<PyResult<_>>()?;
    Ok(pwt::alpha_coefficients(dim, &pts).map_err(err)?.alphas)
}

/// Runs a TOML config in `mode` (or the config's own mode). Returns the
/// report as JSON text and the artifacts as `{name: bytes}`; nothing is
/// written to disk.
#[pyfunction]
#[pyo3(signature = (config, mode = None))]
fn run<'py>(py: Python<'py>, config: &str, mode: Option<&str>) -> PyResult<(String, Bound<'py, PyDict>)> {
    let cfg = ExperimentConfig::parse(config).map_err(err)?;
    let mode = match mode {
        Some(name) => Mode::from_name(name).ok_or_else(|| PwtLabError::new_err(format!("unknown mode '{name}'")))?,
        None => cfg.mode.ok_or_else(|| PwtLabError::new_err("config has no mode"))?,
    };
    cfg.validate(mode).map_err(err)?;
    let out = py.detach(|| cli::run(&cfg, mode)).map_err(err)?;
    let files = PyDict::new(py);
    for a in &out.artifacts {
        files.set_item(&a.name, PyBytes::new(py, &a.bytes))?;
    }
    Ok((out.report.to_string(), files))
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    presets::NAMES.to_vec()
}

#[pyfunction]
fn preset(name: &str) -> Option<&'static str> {
    presets::get(name)
}

#[pymodule]
fn pwtlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PwtLabError", m.py().get_type::<PwtLabError>())?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyIntervalMap>()?;
    m.add_class::<PyDoubleRotation>()?;
    m.add_class::<IterateResult>()?;
    m.add_class::<ArcCertificate>()?;
    m.add_class::<RandomRun>()?;
    m.add_function(wrap_pyfunction!(alpha_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    Ok(())
}
