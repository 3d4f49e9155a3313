//! Bounded search for integer relations `sum n_i v_i = 0`.

use num_integer::Integer;
use serde::Serialize;

use crate::geometry::{norm, Point};

/// Relative tolerance for accepting `|sum n_i v_i|` as zero.
pub const DEPENDENCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum IndependenceVerdict {
    /// No relation with all `|n_i| <= bound`.
    IndependentUpTo(u64),
    /// Integer witness, first nonzero entry positive, entries coprime.
    Dependent(Vec<i64>),
}

impl IndependenceVerdict {
    pub fn is_independent(&self) -> bool {
        matches!(self, IndependenceVerdict::IndependentUpTo(_))
    }
}

/// Searches for an integer relation among `vectors` with coefficients bounded by
/// `coeff_bound`. Two vectors on the line use continued fractions; everything
/// else enumerates `m - d` free coefficients and solves for the rest.
pub fn rational_independence_check(dim: usize, vectors: &[Point], coeff_bound: u64) -> IndependenceVerdict {
    let bound = coeff_bound.max(1) as i64;
    let scale = vectors.iter().map(|v| norm(*v, dim)).fold(0.0, f64::max);
    if let Some(i) = vectors.iter().position(|v| norm(*v, dim) == 0.0) {
        let mut w = vec![0; vectors.len()];
        w[i] = 1;
        return IndependenceVerdict::Dependent(w);
    }
    let accept = |n: &[i64]| -> bool {
        let mut s = [0.0; 2];
        for (c, v) in n.iter().zip(vectors) {
            s[0] += *c as f64 * v[0];
            s[1] += *c as f64 * v[1];
        }
        let height = n.iter().map(|c| c.abs()).max().unwrap_or(0).max(1) as f64;
        norm(s, dim) <= DEPENDENCE_TOL * scale * height
    };
    let found = if dim == 1 && vectors.len() == 2 {
        continued_fraction_relation(vectors[0][0], vectors[1][0], bound, &accept)
    } else {
        enumerate_relation(dim, vectors, bound, &accept)
    };
    match found {
        Some(w) => IndependenceVerdict::Dependent(normalize(w)),
        None => IndependenceVerdict::IndependentUpTo(coeff_bound.max(1)),
    }
}

fn normalize(mut w: Vec<i64>) -> Vec<i64> {
    let g = w.iter().fold(0i64, |g, c| g.gcd(c));
    if g > 1 {
        w.iter_mut().for_each(|c| *c /= g);
    }
    if w.iter().find(|c| **c != 0).is_some_and(|c| *c < 0) {
        w.iter_mut().for_each(|c| *c = -*c);
    }
    w
}

/// Convergents `p/q` of `-b/a`; the relation is `p a + q b = 0`.
fn continued_fraction_relation(a: f64, b: f64, bound: i64, accept: &dyn Fn(&[i64]) -> bool) -> Option<Vec<i64>> {
    let target = -b / a;
    let (mut p_prev, mut p) = (1i128, target.floor() as i128);
    let (mut q_prev, mut q) = (0i128, 1i128);
    let mut rem = target - target.floor();
    for _ in 0..64 {
        if p.unsigned_abs() > bound as u128 || q > bound as i128 {
            return None;
        }
        let w = [p as i64, q as i64];
        if accept(&w) {
            return Some(w.to_vec());
        }
        if rem.abs() < 1e-300 {
            return None;
        }
        let inv = 1.0 / rem;
        let digit = inv.floor();
        if !digit.is_finite() || digit > 1e18 {
            return None;
        }
        rem = inv - digit;
        let digit = digit as i128;
        (p_prev, p) = (p, digit * p + p_prev);
        (q_prev, q) = (q, digit * q + q_prev);
    }
    None
}

/// Picks `d` vectors forming the best-conditioned basis and enumerates the others' coefficients.
fn enumerate_relation(dim: usize, vectors: &[Point], bound: i64, accept: &dyn Fn(&[i64]) -> bool) -> Option<Vec<i64>> {
    let m = vectors.len();
    if m <= dim {
        // full-rank square or smaller systems only have relations through rank loss
        let det = if dim == 1 {
            vectors[0][0]
        } else if m == 2 {
            vectors[0][0] * vectors[1][1] - vectors[0][1] * vectors[1][0]
        } else {
            return None;
        };
        if m == 1 || det.abs() > DEPENDENCE_TOL * norm(vectors[0], dim) * norm(vectors[m - 1], dim) {
            return None;
        }
    }
    let basis: Vec<usize> = if dim == 1 {
        let best = (0..m)
            .max_by(|&i, &j| vectors[i][0].abs().total_cmp(&vectors[j][0].abs()))
            .expect("nonempty");
        vec![best]
    } else {
        let mut best = (0usize, 1usize, -1.0f64);
        for i in 0..m {
            for j in i + 1..m {
                let det = (vectors[i][0] * vectors[j][1] - vectors[i][1] * vectors[j][0]).abs();
                if det > best.2 {
                    best = (i, j, det);
                }
            }
        }
        if best.2 <= 0.0 {
            // everything collinear: fall back to a line search along the first vector
            let dir = vectors[0];
            let len = norm(dir, 2);
            let projected: Vec<Point> = vectors
                .iter()
                .map(|v| [(v[0] * dir[0] + v[1] * dir[1]) / len, 0.0])
                .collect();
            return enumerate_relation(1, &projected, bound, accept);
        }
        vec![best.0, best.1]
    };
    let free: Vec<usize> = (0..m).filter(|i| !basis.contains(i)).collect();
    let mut best: Option<Vec<i64>> = None;
    let mut coeffs = vec![-bound; free.len()];
    if free.is_empty() {
        return None;
    }
    loop {
        if coeffs.iter().any(|c| *c != 0) {
            let mut rhs = [0.0; 2];
            for (c, &i) in coeffs.iter().zip(&free) {
                rhs[0] -= *c as f64 * vectors[i][0];
                rhs[1] -= *c as f64 * vectors[i][1];
            }
            let solved: Vec<f64> = if dim == 1 {
                vec![rhs[0] / vectors[basis[0]][0]]
            } else {
                let (p, q) = (vectors[basis[0]], vectors[basis[1]]);
                let det = p[0] * q[1] - p[1] * q[0];
                vec![(rhs[0] * q[1] - rhs[1] * q[0]) / det, (p[0] * rhs[1] - p[1] * rhs[0]) / det]
            };
            if solved.iter().all(|s| s.abs() <= bound as f64 + 0.5) {
                let mut w = vec![0i64; m];
                for (c, &i) in coeffs.iter().zip(&free) {
                    w[i] = *c;
                }
                for (s, &i) in solved.iter().zip(&basis) {
                    w[i] = s.round() as i64;
                }
                if w.iter().all(|c| c.abs() <= bound) && accept(&w) {
                    let height = |v: &Vec<i64>| v.iter().map(|c| c.abs()).max().unwrap_or(0);
                    if best.as_ref().is_none_or(|b| height(&w) < height(b)) {
                        best = Some(w);
                    }
                }
            }
        }
        // odometer over the free coefficients
        let mut k = 0;
        loop {
            if k == coeffs.len() {
                return best;
            }
            coeffs[k] += 1;
            if coeffs[k] > bound {
                coeffs[k] = -bound;
                k += 1;
            } else {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_examples() {
        assert_eq!(
            rational_independence_check(1, &[[0.3, 0.0], [-0.6, 0.0]], 2),
            IndependenceVerdict::Dependent(vec![2, 1])
        );
        assert_eq!(
            rational_independence_check(1, &[[1.0, 0.0], [-std::f64::consts::SQRT_2, 0.0]], 10),
            IndependenceVerdict::IndependentUpTo(10)
        );
        assert_eq!(
            rational_independence_check(1, &[[0.5, 0.0], [-0.5, 0.0]], 1),
            IndependenceVerdict::Dependent(vec![1, 1])
        );
    }

    #[test]
    fn bound_is_respected() {
        // 3 * 0.2 - 0.6 = 0 needs coefficient 3
        let v = [[0.2, 0.0], [-0.6, 0.0]];
        assert!(rational_independence_check(1, &v, 2).is_independent());
        assert_eq!(rational_independence_check(1, &v, 3), IndependenceVerdict::Dependent(vec![3, 1]));
    }

    /// Brute force over the full box, used as an oracle for the solver route.
    fn brute(dim: usize, v: &[Point], b: i64) -> bool {
        let m = v.len();
        let mut c = vec![-b; m];
        loop {
            if c.iter().any(|x| *x != 0) {
                let s: Point = c.iter().zip(v).fold([0.0, 0.0], |acc, (n, w)| {
                    [acc[0] + *n as f64 * w[0], acc[1] + *n as f64 * w[1]]
                });
                if norm(s, dim) < 1e-9 {
                    return true;
                }
            }
            let mut k = 0;
            loop {
                if k == m {
                    return false;
                }
                c[k] += 1;
                if c[k] > b {
                    c[k] = -b;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn planar_enumeration_matches_brute_force() {
        let cases: Vec<Vec<Point>> = vec![
            vec![[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]],
            vec![[0.5, 0.25], [-0.25, 0.5], [-0.25, -0.75]],
            vec![[0.3, 0.1], [-0.2, 0.45], [-0.1234567, -0.321]],
            vec![[0.25, 0.0], [0.0, 0.5], [-0.5, -0.5], [0.75, 0.25]],
        ];
        for v in cases {
            let fast = rational_independence_check(2, &v, 4);
            assert_eq!(!fast.is_independent(), brute(2, &v, 4), "{v:?}");
            if let IndependenceVerdict::Dependent(w) = fast {
                let s = w.iter().zip(&v).fold([0.0, 0.0], |acc, (n, x)| {
                    [acc[0] + *n as f64 * x[0], acc[1] + *n as f64 * x[1]]
                });
                assert!(norm(s, 2) < 1e-12);
            }
        }
    }

    #[test]
    fn three_on_the_line() {
        let v = [[1.0, 0.0], [std::f64::consts::SQRT_2, 0.0], [-(1.0 + std::f64::consts::SQRT_2), 0.0]];
        assert_eq!(rational_independence_check(1, &v, 5), IndependenceVerdict::Dependent(vec![1, 1, 1]));
        let w = [[1.0, 0.0], [std::f64::consts::SQRT_2, 0.0], [std::f64::consts::PI, 0.0]];
        assert!(rational_independence_check(1, &w, 20).is_independent());
    }
}
