use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{ArcUnion, Scalar};

/// `T(x) = x + alpha + beta` for `x <= delta`, `x + alpha` otherwise (mod 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoubleRotation<S> {
    pub alpha: S,
    pub beta: S,
    pub delta: S,
}

impl<S: Scalar> DoubleRotation<S> {
    pub fn new(alpha: S, beta: S, delta: S) -> Result<Self> {
        let (zero, one) = (S::zero(), S::one());
        if !(zero <= alpha && alpha < one) || !(zero <= beta && beta < one) || !(zero <= delta && delta <= one) {
            return Err(LabError::InvalidMap(format!(
                "double rotation needs alpha in [0,1), beta in [0,1), delta in [0,1]; got {alpha:?}, {beta:?}, {delta:?}"
            )));
        }
        Ok(Self { alpha, beta, delta })
    }

    /// Rigid rotation by `alpha`.
    pub fn rotation(alpha: S) -> Result<Self> {
        Self::new(alpha, S::zero(), S::one())
    }

    pub fn apply(&self, x: S) -> S {
        if x <= self.delta {
            (x + self.alpha + self.beta).frac()
        } else {
            (x + self.alpha).frac()
        }
    }

    /// Exact image of an arc union. The cut is taken as `[0, delta)` / `[delta, 1)`,
    /// which differs from [`apply`](Self::apply) only at the single point `delta`.
    pub fn image_of_set(&self, s: &ArcUnion<S>) -> ArcUnion<S> {
        if self.beta == S::zero() {
            return s.translate_mod1(self.alpha);
        }
        let low = s.restrict(S::zero(), self.delta);
        let high = s.restrict(self.delta, S::one());
        let mut arcs: Vec<(S, S)> = low.translate_mod1(self.alpha + self.beta).arcs().to_vec();
        arcs.extend_from_slice(high.translate_mod1(self.alpha).arcs());
        ArcUnion::new(arcs)
    }
}
