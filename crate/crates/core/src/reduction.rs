//! Momentum maps, Casimirs and the reduction commutation check.

use crate::dynamics::{controlled_field, vf_full, Control, FullState, RotorDynamics};
use crate::lie::{Rotation, Vec3};
use crate::error::Result;
use crate::model::{Coordinates, InertiaParams, ReducedState, ReducedStateC, ReducedStateN};

/// Value of the momentum map for the symmetry group of each case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumValue {
    /// Spatial angular momentum `μ = AΠ`.
    So3(Vec3),
    /// `(μ, a) = (AΠ, AΓ)`: spatial momentum and spatial gravity direction.
    Se3 { mu: Vec3, a: Vec3 },
}

impl MomentumValue {
    pub fn mu(&self) -> Vec3 {
        match self {
            MomentumValue::So3(mu) | MomentumValue::Se3 { mu, .. } => *mu,
        }
    }

    /// Max-norm distance; values from different cases are infinitely far apart.
    pub fn distance(&self, other: &MomentumValue) -> f64 {
        match (self, other) {
            (MomentumValue::So3(a), MomentumValue::So3(b)) => (a - b).amax(),
            (MomentumValue::Se3 { mu: m1, a: a1 }, MomentumValue::Se3 { mu: m2, a: a2 }) => {
                (m1 - m2).amax().max((a1 - a2).amax())
            }
            _ => f64::INFINITY,
        }
    }
}

pub fn momentum_map_c(a: &Rotation, s: &ReducedStateC) -> MomentumValue {
    MomentumValue::So3(a.apply(&s.pi))
}

pub fn momentum_map_n(a: &Rotation, s: &ReducedStateN) -> MomentumValue {
    MomentumValue::Se3 {
        mu: a.apply(&s.pi),
        a: a.apply(&s.gamma),
    }
}

pub fn momentum_map<R: ReducedState>(s: &FullState<R>) -> MomentumValue {
    let mu = s.attitude.apply(&s.reduced.pi());
    match s.reduced.gamma() {
        None => MomentumValue::So3(mu),
        Some(g) => MomentumValue::Se3 {
            mu,
            a: s.attitude.apply(&g),
        },
    }
}

/// `[‖Π‖²]` in the coincident case, `[Π·Γ, ‖Γ‖²]` otherwise.
pub fn casimirs<R: ReducedState>(s: &R) -> Vec<f64> {
    let pi = s.pi();
    match s.gamma() {
        None => vec![pi.norm_squared()],
        Some(g) => vec![pi.dot(&g), g.norm_squared()],
    }
}

pub fn casimir_names<R: ReducedState>() -> &'static [&'static str] {
    match R::CASE {
        crate::model::Case::Coincident => &["casimir_pi2"],
        crate::model::Case::Noncoincident => &["casimir_pigamma", "casimir_gamma2"],
    }
}

/// `‖Tπ·X_full(s) − X_red(π(s))‖∞` for the projection `π` dropping the
/// attitude. The full field is evaluated through spatial quantities and the
/// reduced field from its closed form, so the two paths are independent.
pub fn commutation_residual<R: RotorDynamics>(
    s: &FullState<R>,
    p: &InertiaParams,
    u: &Control,
    t: f64,
) -> Result<f64> {
    let projected = vf_full(s, p, u, t)?.reduced.coords();
    let reduced = controlled_field(&s.reduced, p, u, t)?.coords();
    Ok(projected
        .iter()
        .zip(&reduced)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
