//! Constructive itineraries `J` with `T_J(S) ⊆ A`, verified exactly.
//!
//! Up to the common shift `alpha`, a double rotation moves the short branch
//! of the circle by `beta` against the long one.
//!
//! Stage 1 grows the complementary gap of the image, which must contain 0,
//! until the image is an arc of a few `beta`. When `beta < delta < 1 - beta`
//! each double rotation adds exactly `beta`; otherwise the non-injective arc
//! covers 0 and the gap is placed to end just past 0 (`delta <= beta`) or
//! start just before it (`delta >= 1 - beta`), gaining half the short branch.
//!
//! Stage 2 shrinks the hull arc `K` by rounds. If half of `K` fits in the
//! short branch, two markers at `1/4` and `3/4` of `K` are shifted against
//! each other by `beta` at each double rotation, in the direction that
//! brings them together in the fewest steps, and `K` ends within `3/4 |K|`.
//! Otherwise a chunk at the start of `K` narrower than the short branch is
//! carried by the short branch until it lands back on the rest of `K`.
//! Rotations then move the image into the target.

use std::fmt::Write as _;

use serde::Serialize;

use super::rotation::DoubleRotation;
use crate::error::{LabError, Result};
use crate::geometry::{format_rational, ArcUnion, Rational, Scalar};
use crate::pwt::{rational_independence_check, IndependenceVerdict};

pub const DEFAULT_BUDGET: u64 = 100_000;
/// Double rotations allowed per shrinking round.
const MAX_KICKS_PER_ROUND: usize = 50_000;
const IRRATIONALITY_BOUND: u64 = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcCertificate {
    /// `(symbol, repeat)` in application order; symbol 1 is the rotation.
    pub runs: Vec<(u8, u64)>,
    pub length: u64,
    /// Gap length of the image after each stage-1 double rotation.
    #[serde(skip)]
    pub stage1_gaps: Vec<Rational>,
    /// Hull length of the image at the end of each stage-2 round.
    #[serde(skip)]
    pub round_hulls: Vec<Rational>,
    #[serde(skip)]
    pub image: ArcUnion<Rational>,
    #[serde(skip)]
    pub target: ArcUnion<Rational>,
    pub verified: bool,
}

impl ArcCertificate {
    /// `J = j_1 ... j_k` with `T_J = T_{j_1} ∘ ... ∘ T_{j_k}`: the reverse of application order.
    pub fn itinerary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.length as usize);
        for &(s, n) in self.runs.iter().rev() {
            out.extend(std::iter::repeat_n(s, n as usize));
        }
        out
    }

    /// Plain-text record: parameters, run-length symbols and the exact image.
    pub fn to_text(&self, t2: &DoubleRotation<Rational>) -> String {
        let mut s = String::new();
        let r = format_rational;
        let _ = writeln!(s, "alpha {}", r(&t2.alpha));
        let _ = writeln!(s, "beta {}", r(&t2.beta));
        let _ = writeln!(s, "delta {}", r(&t2.delta));
        let arcs = |u: &ArcUnion<Rational>| {
            u.arcs()
                .iter()
                .map(|(a, b)| format!("[{}, {})", r(a), r(b)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(s, "target {}", arcs(&self.target));
        let _ = writeln!(s, "length {}", self.length);
        let runs: Vec<String> = self.runs.iter().map(|(a, n)| format!("{a}x{n}")).collect();
        let _ = writeln!(s, "runs {}", runs.join(" "));
        let _ = writeln!(s, "image {}", arcs(&self.image));
        let _ = writeln!(s, "verified {}", self.verified);
        s
    }
}

/// Applies the runs (application order) to the full circle.
pub fn apply_runs(t2: &DoubleRotation<Rational>, runs: &[(u8, u64)]) -> ArcUnion<Rational> {
    let mut set = ArcUnion::full_circle();
    for &(sym, n) in runs {
        if sym == 1 {
            set = set.translate_mod1((t2.alpha * Rational::from_integer(n as i128)).frac());
        } else {
            for _ in 0..n {
                set = t2.image_of_set(&set);
            }
        }
    }
    set
}

struct Builder<'a> {
    t2: &'a DoubleRotation<Rational>,
    set: ArcUnion<Rational>,
    runs: Vec<(u8, u64)>,
    budget: u64,
}

impl Builder<'_> {
    fn rotate(&mut self, k: u64) {
        if k == 0 {
            return;
        }
        self.set = self.set.translate_mod1(rot(self.t2.alpha, k));
        push_run(&mut self.runs, 1, k);
    }

    fn kick(&mut self) {
        self.set = self.t2.image_of_set(&self.set);
        push_run(&mut self.runs, 2, 1);
    }

    /// Smallest `k < budget` accepted by `prefilter` (float) and `accept` (exact).
    fn search(
        &self,
        stage: &str,
        prefilter: impl Fn(f64) -> bool,
        accept: impl Fn(u64) -> bool,
    ) -> Result<u64> {
        let a = self.t2.alpha.to_f64();
        for k in 0..self.budget {
            let shift = (k as f64 * a).fract();
            if prefilter(shift) && accept(k) {
                return Ok(k);
            }
        }
        Err(LabError::SynthesisFailed(format!(
            "{stage}: no admissible rotation count below {} (image hull {:?})",
            self.budget,
            self.set.hull_mod1().1.to_f64()
        )))
    }
}

impl Builder<'_> {
    /// Rotation count moving the current image into `target`, if one exists in budget.
    fn fit(&self, target: &ArcUnion<Rational>, start: Rational, len: Rational) -> Result<u64> {
        let (hs, hl) = self.set.hull_mod1();
        let (hs_f, hl_f, st_f, len_f) = (hs.to_f64(), hl.to_f64(), start.to_f64(), len.to_f64());
        self.search(
            "target positioning",
            |shift| in_arc_f((hs_f + shift).fract(), st_f - 1e-12, len_f - hl_f + 2e-12),
            |k| target.contains(&self.set.translate_mod1(rot(self.t2.alpha, k))),
        )
    }
}

#[derive(Clone, Copy)]
enum GapRegime {
    Clean,
    ShortLow,
    ShortHigh,
}

/// First `j >= 1` at which a chunk moved by `j * step` (mod 1) against the
/// rest of a hull of length `kl` meets the rest's span, and whether it
/// overlaps it rather than landing exactly end to end. Chunks at the start
/// of the hull meet on `(0, kl]`, chunks at the end on `[1 - kl, 1)`.
fn chunk_landing(step: Rational, kl: Rational, at_end: bool) -> Option<(usize, bool)> {
    let one = Rational::from_integer(1);
    let zero = Rational::from_integer(0);
    let mut q = zero;
    for j in 1..=MAX_KICKS_PER_ROUND {
        q = (q + step).frac();
        let (meets, touches) = if at_end {
            (q >= one - kl, q == one - kl)
        } else {
            (q > zero && q <= kl, q == kl)
        };
        if meets {
            return Some((j, !touches));
        }
    }
    None
}

impl Builder<'_> {
    /// One shrinking round for a hull `K = [ks, ks + kl)` too long for the
    /// marker round. The first double rotation is placed so a cut point of
    /// the short branch splits a chunk `A` of width in `[m/4, m/2]`,
    /// `m = min(w, kl)`, off the start or the end of `K`. Further double
    /// rotations keep `A` in the short branch and the rest `B` in the long
    /// one until `A` overlaps the span of `B`.
    fn chunk_round(&mut self, ks: Rational, kl: Rational, w: Rational) -> Result<()> {
        let t2 = self.t2;
        let one = Rational::from_integer(1);
        let zero = Rational::from_integer(0);
        let low_short = t2.delta <= one - t2.delta;
        // offset of A against B per double rotation
        let step = if low_short { t2.beta } else { one - t2.beta };
        let (kicks, at_end) = match (chunk_landing(step, kl, false), chunk_landing(step, kl, true)) {
            (Some((j, true)), _) => (j, false),
            (_, Some((j, true))) => (j, true),
            _ => {
                return Err(LabError::SynthesisFailed(format!(
                    "no chunk of a hull of length {} returns within {MAX_KICKS_PER_ROUND} double rotations",
                    kl.to_f64()
                )))
            }
        };
        // the short branch is entered at its start: delta or 0
        let (lo_cut, hi_cut) = if low_short { (zero, t2.delta) } else { (t2.delta, zero) };
        let (cut, other) = if at_end { (lo_cut, hi_cut) } else { (hi_cut, lo_cut) };
        let m = w.min(kl);
        let (cmin, cmax) = (m / Rational::from_integer(4), m / Rational::from_integer(2));
        // distance from the start of K to the cut
        let (dmin, dmax) = if at_end { (kl - cmax, kl - cmin) } else { (cmin, cmax) };
        let (ks_f, kl_f, cut_f, other_f) = (ks.to_f64(), kl.to_f64(), cut.to_f64(), other.to_f64());
        let (dmin_f, dmax_f) = (dmin.to_f64(), dmax.to_f64());
        let k = self.search(
            "chunk split",
            |shift| {
                let p = (ks_f + shift).fract();
                let d = (cut_f - p).rem_euclid(1.0);
                d >= dmin_f - 1e-12 && d <= dmax_f + 1e-12 && (other_f - p).rem_euclid(1.0) >= kl_f - 1e-12
            },
            |k| {
                let p = (ks + rot(t2.alpha, k)).frac();
                let d = (cut - p).frac();
                d >= dmin && d <= dmax && (other - p).frac() >= kl
            },
        )?;
        let p = (ks + rot(t2.alpha, k)).frac();
        let d = (cut - p).frac();
        let (a0, b0) = if at_end { (((p + d).frac(), kl - d), (p, d)) } else { ((p, d), ((p + d).frac(), kl - d)) };
        let (a_shift, b_shift) = if low_short {
            (t2.alpha + t2.beta, t2.alpha)
        } else {
            (t2.alpha, t2.alpha + t2.beta)
        };
        let mut a = ((a0.0 + a_shift).frac(), a0.1);
        let mut b_arc = ((b0.0 + b_shift).frac(), b0.1);
        self.rotate(k);
        self.kick();
        let short = if low_short {
            ArcUnion::arc_mod1(zero, t2.delta)
        } else {
            ArcUnion::arc_mod1(t2.delta, one - t2.delta)
        };
        let long = if low_short {
            ArcUnion::arc_mod1(t2.delta, one - t2.delta)
        } else {
            ArcUnion::arc_mod1(zero, t2.delta)
        };
        let dl = t2.delta.to_f64();
        for _ in 1..kicks {
            let (af, bf) = ((a.0.to_f64(), a.1.to_f64()), (b_arc.0.to_f64(), b_arc.1.to_f64()));
            let fits = |x: f64, len: f64, lo: f64, hi: f64| x >= lo - 1e-12 && x + len <= hi + 1e-12;
            let k = self.search(
                "chunk transport",
                |shift| {
                    let (sa, sb) = ((af.0 + shift).fract(), (bf.0 + shift).fract());
                    if low_short {
                        fits(sa, af.1, 0.0, dl) && fits(sb, bf.1, dl, 1.0)
                    } else {
                        fits(sa, af.1, dl, 1.0) && fits(sb, bf.1, 0.0, dl)
                    }
                },
                |k| {
                    let sh = rot(t2.alpha, k);
                    short.contains(&ArcUnion::arc_mod1((a.0 + sh).frac(), a.1))
                        && long.contains(&ArcUnion::arc_mod1((b_arc.0 + sh).frac(), b_arc.1))
                },
            )?;
            let sh = rot(t2.alpha, k);
            a.0 = (a.0 + sh + a_shift).frac();
            b_arc.0 = (b_arc.0 + sh + b_shift).frac();
            self.rotate(k);
            self.kick();
        }
        Ok(())
    }
}

fn rot(alpha: Rational, k: u64) -> Rational {
    (alpha * Rational::from_integer(k as i128)).frac()
}

fn push_run(runs: &mut Vec<(u8, u64)>, sym: u8, n: u64) {
    match runs.last_mut() {
        Some((s, c)) if *s == sym => *c += n,
        _ => runs.push((sym, n)),
    }
}

/// Circular `x ∈ [start, start + len)` in floats.
fn in_arc_f(x: f64, start: f64, len: f64) -> bool {
    (x - start).rem_euclid(1.0) < len
}

/// Signed number of `beta` steps, smallest in absolute value, taking the
/// marker offset `d` to within `tol` of 0 mod 1.
fn meeting_steps(d: f64, beta: f64, tol: f64) -> Option<i64> {
    let near = |j: i64| {
        let x = (d + j as f64 * beta).rem_euclid(1.0);
        x.min(1.0 - x) <= tol
    };
    (1..=MAX_KICKS_PER_ROUND as i64).find_map(|j| {
        if near(j) {
            Some(j)
        } else if near(-j) {
            Some(-j)
        } else {
            None
        }
    })
}

/// Whether rotating `set` by `shift` and then applying the double rotation
/// moves `m2` by an extra `beta` relative to `m1` (which must land in the
/// upper branch) and keeps the image within
/// distance `r` of the two moved markers.
fn kick_keeps_markers<S: Scalar>(t2: &DoubleRotation<S>, set: &ArcUnion<S>, m1: S, m2: S, r: S, shift: S) -> bool {
    let (p1, p2) = (m1.frac(), m2.frac());
    if p1 <= t2.delta || p2 >= t2.delta {
        return false;
    }
    let next = t2.image_of_set(&set.translate_mod1(shift.frac()));
    let (n1, n2) = (t2.apply(p1), t2.apply(p2));
    let nbhd = ArcUnion::arc_mod1(n1 - r, r + r).union(&ArcUnion::arc_mod1(n2 - r, r + r));
    nbhd.contains(&next)
}

/// Builds `J` with `T_J(S) ⊆ target`, `target = [start, start + len)` on the circle.
pub fn arc_itinerary(t2: &DoubleRotation<Rational>, start: Rational, len: Rational, budget: u64) -> Result<ArcCertificate> {
    let one = Rational::from_integer(1);
    let zero = Rational::from_integer(0);
    let target = ArcUnion::arc_mod1(start, len);
    if len >= one {
        return Ok(ArcCertificate {
            runs: Vec::new(),
            length: 0,
            stage1_gaps: Vec::new(),
            round_hulls: Vec::new(),
            image: ArcUnion::full_circle(),
            target,
            verified: true,
        });
    }
    if len <= zero {
        return Err(LabError::Config("target arc must have positive length".into()));
    }
    if t2.beta <= zero {
        return Err(LabError::InvalidMap("double rotation needs beta > 0".into()));
    }
    // differences of points change by multiples of beta only, so two points
    // 1/(2q) apart stay at least that far apart when beta = p/q
    let floor = Rational::new(1, 2 * t2.beta.denom());
    if len <= floor {
        return Err(LabError::SynthesisFailed(format!(
            "target length {} is at most 1/(2q) = {} for beta = {}; no itinerary exists",
            format_rational(&len),
            format_rational(&floor),
            format_rational(&t2.beta)
        )));
    }
    let alpha_f = t2.alpha.to_f64();
    if let IndependenceVerdict::Dependent(w) =
        rational_independence_check(1, &[[alpha_f, 0.0], [-1.0, 0.0]], IRRATIONALITY_BOUND)
    {
        return Err(LabError::InvalidMap(format!("rotation angle satisfies the integer relation {w:?}")));
    }
    let (beta, delta) = (t2.beta, t2.delta);
    let (beta_f, delta_f) = (beta.to_f64(), delta.to_f64());
    let mut b = Builder {
        t2,
        set: ArcUnion::full_circle(),
        runs: Vec::new(),
        budget,
    };

    // stage 1
    b.kick();
    let mut stage1_gaps = vec![b.set.largest_gap_mod1().1];
    let half = Rational::new(1, 2);
    let quarter = Rational::new(1, 4);
    let w = delta.min(one - delta);
    let regime = if delta > beta && delta < one - beta {
        GapRegime::Clean
    } else if delta <= beta {
        GapRegime::ShortLow
    } else {
        GapRegime::ShortHigh
    };
    loop {
        let (gs, gl) = b.set.largest_gap_mod1();
        // width of the admissible window for the gap start
        let (window, min_window) = match regime {
            GapRegime::Clean => (one - gl - beta - beta, beta * half),
            GapRegime::ShortLow => (one + w * half - gl - delta - beta, w * quarter),
            GapRegime::ShortHigh => ((w * half).min(delta - beta - gl + w * half), w * quarter),
        };
        if window < min_window {
            break;
        }
        let (gs_f, gl_f, w_f) = (gs.to_f64(), gl.to_f64(), w.to_f64());
        let k = b.search(
            "gap growth",
            |shift| {
                // gap [s, s + gl) contains 0
                let s = (gs_f + shift).fract();
                let e = s + gl_f - 1.0;
                match regime {
                    // and avoids [delta - beta, delta + beta)
                    GapRegime::Clean => {
                        e > -1e-12 && s >= delta_f + beta_f - 1e-12 && e <= delta_f - beta_f + 1e-12
                    }
                    GapRegime::ShortLow => e > 1e-12 && e <= w_f / 2.0 + 1e-12 && s >= delta_f + beta_f - 1e-12,
                    GapRegime::ShortHigh => {
                        e > 1e-12 && s >= 1.0 - w_f / 2.0 - 1e-12 && e <= delta_f - beta_f + 1e-12
                    }
                }
            },
            |k| {
                let next = t2.image_of_set(&b.set.translate_mod1(rot(t2.alpha, k)));
                let grown = next.largest_gap_mod1().1;
                match regime {
                    GapRegime::Clean => grown == gl + beta,
                    _ => grown >= gl + w * half,
                }
            },
        )?;
        b.rotate(k);
        b.kick();
        stage1_gaps.push(b.set.largest_gap_mod1().1);
    }

    // stage 2
    let mut round_hulls = Vec::new();
    let fitted = loop {
        let (ks, kl) = b.set.hull_mod1();
        if kl < len {
            if let Ok(k) = b.fit(&target, start, len) {
                break k;
            }
        }
        // the symmetric round needs a 0.6 |K| neighbourhood inside the short branch
        if kl * Rational::new(3, 4) > w {
            b.chunk_round(ks, kl, w)?;
            let hull = b.set.hull_mod1().1;
            if hull >= kl {
                return Err(LabError::SynthesisFailed(format!(
                    "chunk round made no progress on hull {}",
                    kl.to_f64()
                )));
            }
            round_hulls.push(hull);
            continue;
        }
        let quarter = kl / Rational::from_integer(4);
        let r = kl * Rational::new(3, 10);
        let mut m1 = (ks + quarter).frac();
        let mut m2 = (ks + quarter + quarter + quarter).frac();
        let goal = kl * Rational::new(3, 4);
        let steps = meeting_steps(quarter.to_f64() * 2.0, beta_f, kl.to_f64() / 10.0).ok_or_else(|| {
            LabError::SynthesisFailed(format!(
                "markers of a hull of length {} cannot meet within {MAX_KICKS_PER_ROUND} double rotations",
                kl.to_f64()
            ))
        })?;
        let t2f = DoubleRotation {
            alpha: t2.alpha.to_f64(),
            beta: beta_f,
            delta: delta_f,
        };
        let mut kicks = 0;
        while b.set.hull_mod1().1 > goal {
            if kicks == steps.unsigned_abs() {
                return Err(LabError::SynthesisFailed(format!(
                    "shrinking round from hull {} ended at hull {}",
                    kl.to_f64(),
                    b.set.hull_mod1().1.to_f64()
                )));
            }
            kicks += 1;
            // the marker in the upper branch falls behind by beta
            let (lead, trail) = if steps > 0 { (m1, m2) } else { (m2, m1) };
            let set_f = b.set.map_scalar(|x| x.to_f64());
            let (lf, tf, rf) = (lead.to_f64(), trail.to_f64(), r.to_f64());
            let k = b.search(
                "marker positioning",
                |shift| kick_keeps_markers(&t2f, &set_f, lf + shift, tf + shift, rf + 1e-9, shift),
                |k| {
                    let sh = rot(t2.alpha, k);
                    kick_keeps_markers(t2, &b.set, lead + sh, trail + sh, r, sh)
                },
            )?;
            let s = rot(t2.alpha, k);
            m1 = t2.apply((m1 + s).frac());
            m2 = t2.apply((m2 + s).frac());
            b.rotate(k);
            b.kick();
        }
        round_hulls.push(b.set.hull_mod1().1);

    };
    b.rotate(fitted);

    let image = apply_runs(t2, &b.runs);
    let verified = image == b.set && target.contains(&image);
    let length = b.runs.iter().map(|r| r.1).sum();
    Ok(ArcCertificate {
        runs: b.runs,
        length,
        stage1_gaps,
        round_hulls,
        image,
        target,
        verified,
    })
}
