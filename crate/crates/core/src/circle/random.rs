//! Bernoulli compositions of a rotation and a double rotation.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::rotation::DoubleRotation;
use crate::error::{LabError, Result};
use crate::geometry::{format_rational, ArcUnion, Rational, Scalar};

/// Generator used for every random draw; recorded in run outputs.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.3, seed_from_u64)";

pub const DEFAULT_ARC_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct RandomComposeParams {
    /// Probability of drawing the rotation `T_1`.
    pub p: f64,
    pub seed: u64,
    pub n: usize,
    pub eps_list: Vec<f64>,
    pub arc_cap: usize,
    /// Keep the sets of the final quartile for [`attractor_histogram`].
    pub keep_tail: bool,
}

impl RandomComposeParams {
    pub fn new(p: f64, seed: u64, n: usize) -> Self {
        Self {
            p,
            seed,
            n,
            eps_list: vec![1e-2],
            arc_cap: DEFAULT_ARC_CAP,
            keep_tail: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomRun {
    pub p: f64,
    pub seed: u64,
    pub n: usize,
    pub rng_algorithm: &'static str,
    /// Symbol drawn at steps `1..=n` (1 = rotation, 2 = double rotation).
    pub symbols: Vec<u8>,
    /// Exact `Leb(G_n S)` for `n = 0..=n`.
    #[serde(skip)]
    pub measure_trace: Vec<Rational>,
    /// `(eps, first n with measure < eps)`.
    pub first_below: Vec<(f64, Option<usize>)>,
    pub max_arcs: usize,
    /// `(n, G_n S)` for the final quartile when requested.
    #[serde(skip)]
    pub tail: Vec<(usize, ArcUnion<Rational>)>,
}

impl RandomRun {
    pub fn final_measure(&self) -> Rational {
        *self.measure_trace.last().expect("trace starts at n = 0")
    }

    pub fn is_monotone(&self) -> bool {
        self.measure_trace.windows(2).all(|w| w[1] <= w[0])
    }

    /// CSV with columns `n,measure,symbol`; measures as exact `p/q`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "measure", "symbol"]).map_err(csv_err)?;
        for (n, m) in self.measure_trace.iter().enumerate() {
            let sym = if n == 0 { String::new() } else { self.symbols[n - 1].to_string() };
            out.write_record([n.to_string(), format_rational(m), sym]).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> LabError {
    LabError::Io(e.to_string())
}

/// Runs `S_n = T_{i_n}(S_{n-1})` from the full circle with seeded i.i.d. draws,
/// `P(i = 1) = p`. For each `n` the law of `Leb(S_n)` equals that of
/// `Leb(T_{i_1} ∘ ... ∘ T_{i_n} S)`, since both compose the same i.i.d. maps.
pub fn random_compose(t1_alpha: Rational, t2: &DoubleRotation<Rational>, params: &RandomComposeParams) -> Result<RandomRun> {
    if !(0.0..=1.0).contains(&params.p) {
        return Err(LabError::Config(format!("p must lie in [0,1], got {}", params.p)));
    }
    if params.n == 0 {
        return Err(LabError::Config("n must be at least 1".into()));
    }
    let t1 = DoubleRotation::rotation(t1_alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut set = ArcUnion::<Rational>::full_circle();
    let mut measure_trace = Vec::with_capacity(params.n + 1);
    measure_trace.push(set.measure());
    let mut symbols = Vec::with_capacity(params.n);
    let mut first_below: Vec<(f64, Option<usize>)> = params.eps_list.iter().map(|&e| (e, None)).collect();
    let tail_from = params.n - params.n / 4;
    let mut tail = Vec::new();
    let mut max_arcs = set.len();
    for step in 1..=params.n {
        let sym = if rng.gen_bool(params.p) { 1u8 } else { 2u8 };
        set = if sym == 1 { t1.image_of_set(&set) } else { t2.image_of_set(&set) };
        if set.len() > params.arc_cap {
            return Err(LabError::ArcExplosion {
                count: set.len(),
                cap: params.arc_cap,
            });
        }
        max_arcs = max_arcs.max(set.len());
        let mu = set.measure();
        let mu_f = mu.to_f64();
        for (eps, first) in first_below.iter_mut() {
            if first.is_none() && mu_f < *eps {
                *first = Some(step);
            }
        }
        symbols.push(sym);
        measure_trace.push(mu);
        if params.keep_tail && step > tail_from {
            tail.push((step, set.clone()));
        }
    }
    Ok(RandomRun {
        p: params.p,
        seed: params.seed,
        n: params.n,
        rng_algorithm: RNG_ALGORITHM,
        symbols,
        measure_trace,
        first_below,
        max_arcs,
        tail,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: usize,
    /// Mean over tail iterates of `Leb(S_n ∩ bin)`.
    pub mass: Vec<f64>,
    pub iterates: usize,
}

impl Histogram {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["bin", "lo", "hi", "mass"]).map_err(csv_err)?;
        for (i, m) in self.mass.iter().enumerate() {
            let lo = i as f64 / self.bins as f64;
            let hi = (i + 1) as f64 / self.bins as f64;
            out.write_record([i.to_string(), fmt17(lo), fmt17(hi), fmt17(*m)]).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Floats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-bin mass of the final-quartile sets, averaged over those iterates.
/// Bin masses are accumulated exactly and converted once.
pub fn attractor_histogram(run: &RandomRun, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(LabError::Config("histogram needs at least one bin".into()));
    }
    if run.tail.is_empty() {
        return Err(LabError::Config("run was made without keep_tail".into()));
    }
    let b = bins as i128;
    let mut acc = vec![Rational::from_integer(0); bins];
    for (_, set) in &run.tail {
        for &(lo, hi) in set.arcs() {
            let first = (lo * Rational::from_integer(b)).floor().to_integer();
            let last = ((hi * Rational::from_integer(b)).ceil().to_integer()).min(b);
            for k in first.max(0)..last {
                let (bl, bh) = (Rational::new(k, b), Rational::new(k + 1, b));
                let l = lo.max(bl);
                let h = hi.min(bh);
                if h > l {
                    acc[k as usize] += h - l;
                }
            }
        }
    }
    let count = Rational::from_integer(run.tail.len() as i128);
    Ok(Histogram {
        bins,
        mass: acc.into_iter().map(|m| (m / count).to_f64()).collect(),
        iterates: run.tail.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    fn t2(beta: Rational) -> DoubleRotation<Rational> {
        DoubleRotation::new(rat(381966, 1000003), beta, rat(1, 2)).unwrap()
    }

    #[test]
    fn all_rotations_keep_full_measure() {
        let run = random_compose(rat(381966, 1000003), &t2(rat(1, 10)), &RandomComposeParams::new(1.0, 5, 200)).unwrap();
        assert!(run.measure_trace.iter().all(|m| *m == rat(1, 1)));
        assert!(run.symbols.iter().all(|&s| s == 1));
    }

    #[test]
    fn one_double_rotation_leaves_nine_tenths() {
        let run = random_compose(rat(381966, 1000003), &t2(rat(1, 10)), &RandomComposeParams::new(0.0, 5, 1)).unwrap();
        assert_eq!(run.measure_trace, vec![rat(1, 1), rat(9, 10)]);
    }

    #[test]
    fn same_seed_same_trace() {
        let p = RandomComposeParams::new(0.5, 42, 2000);
        let a = random_compose(rat(381966, 1000003), &t2(rat(1, 20)), &p).unwrap();
        let b = random_compose(rat(381966, 1000003), &t2(rat(1, 20)), &p).unwrap();
        assert_eq!(a.measure_trace, b.measure_trace);
        assert!(a.is_monotone());
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn arc_cap_is_enforced() {
        let mut p = RandomComposeParams::new(0.5, 1, 100);
        p.arc_cap = 1;
        let e = random_compose(rat(381966, 1000003), &t2(rat(1, 20)), &p).unwrap_err();
        assert!(matches!(e, LabError::ArcExplosion { .. }));
    }

    #[test]
    fn histogram_examples() {
        let mut p = RandomComposeParams::new(1.0, 3, 40);
        p.keep_tail = true;
        let flat = random_compose(rat(381966, 1000003), &t2(rat(1, 10)), &p).unwrap();
        let h = attractor_histogram(&flat, 10).unwrap();
        assert!(h.mass.iter().all(|m| (m - 0.1).abs() < 1e-15));

        let mut q = RandomComposeParams::new(0.0, 3, 40);
        q.keep_tail = true;
        let run = random_compose(rat(381966, 1000003), &t2(rat(1, 10)), &q).unwrap();
        let h = attractor_histogram(&run, 64).unwrap();
        let mean: f64 = run.tail.iter().map(|(_, s)| s.measure().to_f64()).sum::<f64>() / run.tail.len() as f64;
        assert!((h.mass.iter().sum::<f64>() - mean).abs() < 1e-12);
        // every tail set misses the gap [alpha, alpha + beta) of the last step
        let alpha = 381966.0 / 1000003.0;
        let bin = ((alpha + 0.05) * 64.0) as usize;
        assert_eq!(h.mass[bin], 0.0);
    }
}
