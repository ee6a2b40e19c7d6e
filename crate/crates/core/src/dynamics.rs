//! Closed-form reduced vector fields, the rotor control lift, attitude
//! reconstruction and fixed-step time integration.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::{exp_so3, hat, reorthonormalize, spatial_momentum, Mat3, Rotation, Vec3};
use crate::model::{
    Coordinates, InertiaParams, ReducedState, ReducedStateC, ReducedStateN, Tangent, TangentC,
    TangentN,
};
use crate::reduction;

/// Coincident-case field `X_H` written componentwise.
pub fn vf_reduced_c(s: &ReducedStateC, p: &InertiaParams) -> TangentC {
    let (i1, i2, i3) = (p.ibar.x, p.ibar.y, p.ibar.z);
    let (p1, p2, p3) = (s.pi.x, s.pi.y, s.pi.z);
    let l = s.l;
    TangentC {
        pi_dot: Vec3::new(
            ((i2 - i3) * p2 * p3 - i2 * p2 * l) / (i2 * i3),
            ((i3 - i1) * p3 * p1 + i1 * p1 * l) / (i3 * i1),
            ((i1 - i2) * p1 * p2) / (i1 * i2),
        ),
        alpha_dot: -(p3 - l) / i3 + l / p.j3,
        l_dot: 0.0,
    }
}

/// Non-coincident field: the coincident `Π̇` plus `gh Γ×χ`, and `Γ̇ = Γ×Ω`.
pub fn vf_reduced_n(s: &ReducedStateN, p: &InertiaParams) -> TangentN {
    let base = vf_reduced_c(&s.coincident_part(), p);
    let (i1, i2, i3) = (p.ibar.x, p.ibar.y, p.ibar.z);
    let (p1, p2, p3) = (s.pi.x, s.pi.y, s.pi.z);
    let (g1, g2, g3) = (s.gamma.x, s.gamma.y, s.gamma.z);
    let (c1, c2, c3) = (p.chi.x, p.chi.y, p.chi.z);
    let l = s.l;
    let gh = p.gh;
    TangentN {
        pi_dot: base.pi_dot
            + Vec3::new(
                gh * (g2 * c3 - g3 * c2),
                gh * (g3 * c1 - g1 * c3),
                gh * (g1 * c2 - g2 * c1),
            ),
        gamma_dot: Vec3::new(
            (i2 * g2 * p3 - i3 * g3 * p2 - i2 * g2 * l) / (i2 * i3),
            (i3 * g3 * p1 - i1 * g1 * p3 + i1 * g1 * l) / (i3 * i1),
            (i1 * g1 * p2 - i2 * g2 * p1) / (i1 * i2),
        ),
        alpha_dot: base.alpha_dot,
        l_dot: base.l_dot,
    }
}

/// Dynamics shared by both reduced cases.
pub trait RotorDynamics: ReducedState {
    /// The closed-form reduced field `X_H` (no control).
    fn reduced_field(&self, p: &InertiaParams) -> Self::Tangent;

    /// Reduced part of the unreduced field at attitude `a`, computed through
    /// the spatial momentum and the spatial gravity direction.
    fn unreduced_field(&self, a: &Rotation, p: &InertiaParams) -> Self::Tangent;

    fn body_rate(&self, p: &InertiaParams) -> Vec3 {
        p.body_rate(&self.pi(), self.l())
    }
}

impl RotorDynamics for ReducedStateC {
    fn reduced_field(&self, p: &InertiaParams) -> TangentC {
        vf_reduced_c(self, p)
    }

    fn unreduced_field(&self, a: &Rotation, p: &InertiaParams) -> TangentC {
        // m = AΠ is constant, so Π̇ = Aᵀṁ - Ω×Π = Π×Ω
        let omega = self.body_rate(p);
        let m_dot = Vec3::zeros();
        TangentC {
            pi_dot: a.matrix().transpose() * m_dot - omega.cross(&self.pi),
            alpha_dot: p.rotor_rate(&self.pi, self.l),
            l_dot: 0.0,
        }
    }
}

impl RotorDynamics for ReducedStateN {
    fn reduced_field(&self, p: &InertiaParams) -> TangentN {
        vf_reduced_n(self, p)
    }

    fn unreduced_field(&self, a: &Rotation, p: &InertiaParams) -> TangentN {
        let omega = self.body_rate(p);
        let at = a.matrix().transpose();
        let gravity_dir = a.apply(&self.gamma);
        let offset = a.apply(&p.chi);
        let spatial_torque = gravity_dir.cross(&offset) * p.gh;
        TangentN {
            pi_dot: at * spatial_torque - omega.cross(&self.pi),
            // spatial gravity direction is fixed
            gamma_dot: at * Vec3::zeros() - omega.cross(&self.gamma),
            alpha_dot: p.rotor_rate(&self.pi, self.l),
            l_dot: 0.0,
        }
    }
}

/// Torque as a function of flat reduced coordinates and time.
pub type TorqueFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// Rotor torque law `u(state, t)`, independent of the attitude.
#[derive(Clone, Default)]
pub enum Control {
    #[default]
    None,
    Constant(f64),
    /// `u = -gain·l`.
    LinearFeedback { gain: f64 },
    /// Arbitrary law on flat reduced coordinates.
    Custom(Arc<TorqueFn>),
}

impl fmt::Debug for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Control::None => write!(f, "None"),
            Control::Constant(c) => write!(f, "Constant({c})"),
            Control::LinearFeedback { gain } => write!(f, "LinearFeedback {{ gain: {gain} }}"),
            Control::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Control {
    pub fn torque<S: ReducedState>(&self, s: &S, t: f64) -> f64 {
        match self {
            Control::None => 0.0,
            Control::Constant(c) => *c,
            Control::LinearFeedback { gain } => -gain * s.l(),
            Control::Custom(f) => f(&s.coords(), t),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Control::None)
    }
}

/// Adds the vertical lift of the rotor torque: `l̇ ← l̇ + u(s, t)`.
pub fn apply_control<S: ReducedState>(
    base: &S::Tangent,
    u: &Control,
    s: &S,
    t: f64,
) -> Result<S::Tangent> {
    if u.is_none() {
        return Ok(*base);
    }
    let torque = u.torque(s, t);
    if !torque.is_finite() {
        return Err(Error::non_finite("control torque"));
    }
    Ok(base.with_l_dot(base.l_dot() + torque))
}

/// Controlled reduced field `X_H + vlift(u)`.
pub fn controlled_field<S: RotorDynamics>(
    s: &S,
    p: &InertiaParams,
    u: &Control,
    t: f64,
) -> Result<S::Tangent> {
    apply_control(&s.reduced_field(p), u, s, t)
}

/// Attitude plus reduced state; `T*Q` in the left trivialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState<R> {
    pub attitude: Rotation,
    pub reduced: R,
}

pub type FullStateC = FullState<ReducedStateC>;
pub type FullStateN = FullState<ReducedStateN>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullTangent<T> {
    pub attitude_dot: Mat3,
    pub reduced: T,
}

impl<R: RotorDynamics> FullState<R> {
    pub fn new(attitude: Rotation, reduced: R) -> Self {
        FullState { attitude, reduced }
    }

    pub fn spatial_momentum(&self) -> Vec3 {
        spatial_momentum(&self.attitude, &self.reduced.pi())
    }
}

/// `Ȧ = A·hat(Ω)` together with the controlled reduced field.
pub fn vf_full<R: RotorDynamics>(
    s: &FullState<R>,
    p: &InertiaParams,
    u: &Control,
    t: f64,
) -> Result<FullTangent<R::Tangent>> {
    let omega = s.reduced.body_rate(p);
    let base = s.reduced.unreduced_field(&s.attitude, p);
    Ok(FullTangent {
        attitude_dot: s.attitude.matrix() * hat(&omega),
        reduced: apply_control(&base, u, &s.reduced, t)?,
    })
}

impl<T: Tangent> Add for FullTangent<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        FullTangent {
            attitude_dot: self.attitude_dot + o.attitude_dot,
            reduced: self.reduced + o.reduced,
        }
    }
}

impl<T: Tangent> Mul<f64> for FullTangent<T> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        FullTangent {
            attitude_dot: self.attitude_dot * k,
            reduced: self.reduced * k,
        }
    }
}

/// Conserved-quantity columns recorded with every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub energy: f64,
    pub casimirs: Vec<f64>,
    pub spatial_momentum: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<S> {
    pub t: f64,
    pub state: S,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub samples: Vec<Sample<S>>,
}

impl<S> Trajectory<S> {
    pub fn first(&self) -> &Sample<S> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample<S> {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// States the integrators can step.
pub trait OdeState: Clone {
    type Tangent: Copy + Add<Output = Self::Tangent> + Mul<f64, Output = Self::Tangent>;

    /// `self + h·d` in the ambient coordinates.
    fn advance(&self, d: &Self::Tangent, h: f64) -> Self;

    fn is_finite(&self) -> bool;

    /// Periodic drift repair; identity for vector-space states.
    fn repair(&self) -> Result<Self> {
        Ok(self.clone())
    }

    fn diagnostics(&self, p: &InertiaParams) -> Diagnostics;
}

impl<R: RotorDynamics> OdeState for R {
    type Tangent = R::Tangent;

    fn advance(&self, d: &R::Tangent, h: f64) -> R {
        ReducedState::advance(self, d, h)
    }

    fn is_finite(&self) -> bool {
        Coordinates::is_finite(self)
    }

    fn diagnostics(&self, p: &InertiaParams) -> Diagnostics {
        Diagnostics {
            energy: self.hamiltonian(p),
            casimirs: reduction::casimirs(self),
            spatial_momentum: None,
        }
    }
}

impl<R: RotorDynamics> OdeState for FullState<R> {
    type Tangent = FullTangent<R::Tangent>;

    fn advance(&self, d: &Self::Tangent, h: f64) -> Self {
        FullState {
            attitude: Rotation::from_matrix_unchecked(self.attitude.matrix() + d.attitude_dot * h),
            reduced: ReducedState::advance(&self.reduced, &d.reduced, h),
        }
    }

    fn is_finite(&self) -> bool {
        self.attitude.matrix().iter().all(|x| x.is_finite()) && Coordinates::is_finite(&self.reduced)
    }

    fn repair(&self) -> Result<Self> {
        Ok(FullState {
            attitude: reorthonormalize(self.attitude.matrix())?,
            reduced: self.reduced,
        })
    }

    fn diagnostics(&self, p: &InertiaParams) -> Diagnostics {
        Diagnostics {
            spatial_momentum: Some(self.spatial_momentum()),
            ..self.reduced.diagnostics(p)
        }
    }
}

/// Fixed-step schedule shared by both integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub steps: usize,
    /// Record every `stride`-th step (the initial state is always recorded).
    pub stride: usize,
    /// Reorthonormalize the attitude every this many RK4 steps.
    pub reorthonormalize_every: Option<usize>,
}

impl StepConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        StepConfig {
            dt,
            steps,
            stride: 1,
            reorthonormalize_every: Some(100),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParams("steps must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParams("stride must be at least 1".into()));
        }
        if self.reorthonormalize_every == Some(0) {
            return Err(Error::InvalidParams("reorthonormalization cadence must be at least 1".into()));
        }
        Ok(())
    }
}

fn record<S: OdeState>(out: &mut Vec<Sample<S>>, t: f64, s: &S, p: &InertiaParams) {
    out.push(Sample {
        t,
        state: s.clone(),
        diagnostics: s.diagnostics(p),
    });
}

fn step_error(e: Error, step: usize) -> Error {
    match e {
        Error::NonFinite { context, .. } => Error::NonFinite {
            context,
            step: Some(step),
        },
        other => other,
    }
}

/// One classical RK4 step.
pub fn rk4_step<S, F>(field: &F, s: &S, t: f64, dt: f64) -> Result<S>
where
    S: OdeState,
    F: Fn(&S, f64) -> Result<S::Tangent>,
{
    let k1 = field(s, t)?;
    let k2 = field(&s.advance(&k1, 0.5 * dt), t + 0.5 * dt)?;
    let k3 = field(&s.advance(&k2, 0.5 * dt), t + 0.5 * dt)?;
    let k4 = field(&s.advance(&k3, dt), t + dt)?;
    Ok(s.advance(&(k1 + k2 * 2.0 + k3 * 2.0 + k4), dt / 6.0))
}

/// Classical fixed-step RK4 for any [`OdeState`].
///
/// Full states are stepped in the ambient matrix space and repaired every
/// `reorthonormalize_every` steps.
pub fn integrate_rk4<S, F>(field: F, s0: S, cfg: &StepConfig, p: &InertiaParams) -> Result<Trajectory<S>>
where
    S: OdeState,
    F: Fn(&S, f64) -> Result<S::Tangent>,
{
    cfg.validate()?;
    let mut samples = Vec::with_capacity(cfg.steps / cfg.stride + 1);
    record(&mut samples, 0.0, &s0, p);
    let mut s = s0;
    for n in 0..cfg.steps {
        let t = n as f64 * cfg.dt;
        s = rk4_step(&field, &s, t, cfg.dt).map_err(|e| step_error(e, n))?;
        if let Some(every) = cfg.reorthonormalize_every {
            if (n + 1) % every == 0 {
                s = s.repair().map_err(|e| step_error(e, n))?;
            }
        }
        if !s.is_finite() {
            return Err(Error::NonFinite {
                context: "rk4 integration",
                step: Some(n),
            });
        }
        if (n + 1) % cfg.stride == 0 {
            record(&mut samples, (n + 1) as f64 * cfg.dt, &s, p);
        }
    }
    Ok(Trajectory { samples })
}

/// `dexp⁻¹` for `A = A₀·exp(hat(θ))`, truncated after the second commutator.
fn dexpinv(theta: &Vec3, omega: &Vec3) -> Vec3 {
    let c1 = theta.cross(omega);
    omega + c1 * 0.5 + theta.cross(&c1) / 12.0
}

/// One Munthe-Kaas RK4 step. `field` returns the body rate `Ω` and the
/// reduced tangent at a full state.
pub fn rkmk4_step<R, F>(field: &F, s: &FullState<R>, t: f64, dt: f64) -> Result<FullState<R>>
where
    R: RotorDynamics,
    F: Fn(&FullState<R>, f64) -> Result<(Vec3, R::Tangent)>,
{
    let at = |theta: Vec3, y: R| FullState {
        attitude: s.attitude.compose(&exp_so3(&theta)),
        reduced: y,
    };
    let y0 = s.reduced;

    let (w1, f1) = field(s, t)?;
    let k1 = w1;

    let theta2 = k1 * (0.5 * dt);
    let (w2, f2) = field(&at(theta2, ReducedState::advance(&y0, &f1, 0.5 * dt)), t + 0.5 * dt)?;
    let k2 = dexpinv(&theta2, &w2);

    let theta3 = k2 * (0.5 * dt);
    let (w3, f3) = field(&at(theta3, ReducedState::advance(&y0, &f2, 0.5 * dt)), t + 0.5 * dt)?;
    let k3 = dexpinv(&theta3, &w3);

    let theta4 = k3 * dt;
    let (w4, f4) = field(&at(theta4, ReducedState::advance(&y0, &f3, dt)), t + dt)?;
    let k4 = dexpinv(&theta4, &w4);

    let theta = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    Ok(at(theta, ReducedState::advance(&y0, &(f1 + f2 * 2.0 + f3 * 2.0 + f4), dt / 6.0)))
}

/// Lie-group RK4 (Munthe-Kaas): the attitude is only ever multiplied by
/// exponentials, so it stays on SO(3) without reorthonormalization.
pub fn integrate_lie_rkmk4<R, F>(
    field: F,
    s0: FullState<R>,
    cfg: &StepConfig,
    p: &InertiaParams,
) -> Result<Trajectory<FullState<R>>>
where
    R: RotorDynamics,
    F: Fn(&FullState<R>, f64) -> Result<(Vec3, R::Tangent)>,
{
    cfg.validate()?;
    let mut samples = Vec::with_capacity(cfg.steps / cfg.stride + 1);
    record(&mut samples, 0.0, &s0, p);
    let mut s = s0;
    for n in 0..cfg.steps {
        let t = n as f64 * cfg.dt;
        s = rkmk4_step(&field, &s, t, cfg.dt).map_err(|e| step_error(e, n))?;
        if !OdeState::is_finite(&s) {
            return Err(Error::NonFinite {
                context: "rkmk4 integration",
                step: Some(n),
            });
        }
        if (n + 1) % cfg.stride == 0 {
            record(&mut samples, (n + 1) as f64 * cfg.dt, &s, p);
        }
    }
    Ok(Trajectory { samples })
}

/// RK4 on the reduced manifold with the controlled field.
pub fn simulate_reduced<R: RotorDynamics>(
    s0: R,
    p: &InertiaParams,
    u: &Control,
    cfg: &StepConfig,
) -> Result<Trajectory<R>> {
    integrate_rk4(|s: &R, t| controlled_field(s, p, u, t), s0, cfg, p)
}

/// Ambient RK4 on the full state with periodic reorthonormalization.
pub fn simulate_full_rk4<R: RotorDynamics>(
    s0: FullState<R>,
    p: &InertiaParams,
    u: &Control,
    cfg: &StepConfig,
) -> Result<Trajectory<FullState<R>>> {
    integrate_rk4(|s: &FullState<R>, t| vf_full(s, p, u, t), s0, cfg, p)
}

/// Munthe-Kaas RK4 on the full state.
pub fn simulate_full_rkmk4<R: RotorDynamics>(
    s0: FullState<R>,
    p: &InertiaParams,
    u: &Control,
    cfg: &StepConfig,
) -> Result<Trajectory<FullState<R>>> {
    integrate_lie_rkmk4(
        |s: &FullState<R>, t| {
            let v = vf_full(s, p, u, t)?;
            Ok((s.reduced.body_rate(p), v.reduced))
        },
        s0,
        cfg,
        p,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hamiltonian_c;

    fn reference(gh: f64) -> InertiaParams {
        InertiaParams::new([3.0, 2.0, 1.0], 1.0, gh, [0.0, 0.0, 1.0]).unwrap()
    }

    fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
        (a - b).amax() < tol
    }

    #[test]
    fn vf_reduced_c_examples() {
        let p = reference(0.0);
        let v = vf_reduced_c(&ReducedStateC::new([0.0; 3], 0.3, 0.0), &p);
        assert_eq!(v.coords(), vec![0.0; 5]);

        let v = vf_reduced_c(&ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0), &p);
        assert!(close(&v.pi_dot, &Vec3::new(-0.5, 1.0 / 3.0, 1.0 / 6.0), 1e-15));
        assert_eq!(v.alpha_dot, 1.0);
        assert_eq!(v.l_dot, 0.0);

        let v = vf_reduced_c(&ReducedStateC::new([2.5, 0.0, 0.0], 0.0, 0.0), &p);
        assert_eq!(v.pi_dot, Vec3::zeros());
    }

    #[test]
    fn vf_reduced_n_examples() {
        let p = reference(1.0);
        let v = vf_reduced_n(&ReducedStateN::new([0.0; 3], [0.0, 0.0, 1.0], 0.0, 0.0), &p);
        assert!(v.coords().iter().all(|&c| c == 0.0));

        let p2 = reference(2.0);
        let v = vf_reduced_n(&ReducedStateN::new([0.0; 3], [1.0, 0.0, 0.0], 0.0, 0.0), &p2);
        assert_eq!(v.pi_dot, Vec3::new(0.0, -2.0, 0.0));
        assert_eq!(v.gamma_dot, Vec3::zeros());

        let v = vf_reduced_n(&ReducedStateN::new([1.0, 1.0, 1.0], [0.0, 0.0, 1.0], 0.0, 1.0), &p);
        assert!(close(&v.pi_dot, &Vec3::new(-0.5, 1.0 / 3.0, 1.0 / 6.0), 1e-15));
        assert!(close(&v.gamma_dot, &Vec3::new(-0.5, 1.0 / 3.0, 0.0), 1e-15));
        assert_eq!(v.alpha_dot, 1.0);
    }

    #[test]
    fn control_lift_examples() {
        let s = ReducedStateC::new([1.0, -2.0, 0.5], 0.1, 2.0);
        let p = reference(0.0);
        let base = vf_reduced_c(&s, &p);
        assert_eq!(apply_control(&base, &Control::None, &s, 0.0).unwrap(), base);

        let lifted = apply_control(&base, &Control::Constant(0.3), &s, 0.0).unwrap();
        assert_eq!(lifted.l_dot, base.l_dot + 0.3);
        assert_eq!((lifted.pi_dot, lifted.alpha_dot), (base.pi_dot, base.alpha_dot));

        let lifted = apply_control(&base, &Control::LinearFeedback { gain: 1.0 }, &s, 0.0).unwrap();
        assert_eq!(lifted.l_dot, base.l_dot - 2.0);

        let nan = Control::Custom(Arc::new(|_, _| f64::NAN));
        assert!(matches!(apply_control(&base, &nan, &s, 0.0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn vf_full_examples() {
        let p = reference(0.0);
        let rest = FullState::new(Rotation::identity(), ReducedStateC::new([0.0; 3], 0.0, 0.0));
        let v = vf_full(&rest, &p, &Control::None, 0.0).unwrap();
        assert_eq!(v.attitude_dot, Mat3::zeros());
        assert_eq!(v.reduced.coords(), vec![0.0; 5]);

        let a = exp_so3(&Vec3::new(0.2, -0.4, 1.0));
        let spin = FullState::new(a, ReducedStateC::new([0.0, 0.0, p.ibar.z], 0.0, 0.0));
        let v = vf_full(&spin, &p, &Control::None, 0.0).unwrap();
        assert!((v.attitude_dot - a.matrix() * hat(&Vec3::z())).amax() < 1e-15);
    }

    #[test]
    fn spatial_momentum_is_stationary_along_vf_full() {
        let p = reference(0.0);
        let a = exp_so3(&Vec3::new(0.3, 0.1, -0.8));
        let s = FullState::new(a, ReducedStateC::new([1.0, -0.5, 2.0], 0.0, 0.7));
        let v = vf_full(&s, &p, &Control::None, 0.0).unwrap();
        // d/dt(AΠ) = ȦΠ + AΠ̇
        let d = v.attitude_dot * s.reduced.pi + a.matrix() * v.reduced.pi_dot;
        assert!(d.amax() < 1e-14, "{d}");

        // and along a short integration, by finite differences in time
        let cfg = StepConfig::new(1e-3, 20);
        let traj = simulate_full_rk4(s, &p, &Control::None, &cfg).unwrap();
        let mu0 = traj.first().diagnostics.spatial_momentum.unwrap();
        let mu1 = traj.last().diagnostics.spatial_momentum.unwrap();
        assert!(((mu1 - mu0) / 0.02).amax() < 1e-10);
    }

    #[test]
    fn rk4_zero_field_is_constant() {
        let p = reference(0.0);
        let s0 = ReducedStateC::new([1.0, 2.0, 3.0], 0.5, -1.0);
        let traj = integrate_rk4(|_: &ReducedStateC, _| Ok(TangentC::zero()), s0, &StepConfig::new(0.1, 50), &p).unwrap();
        assert_eq!(traj.len(), 51);
        assert!(traj.samples.iter().all(|x| x.state == s0));
    }

    #[test]
    fn rkmk4_zero_field_leaves_attitude_untouched() {
        let p = reference(0.0);
        let a = exp_so3(&Vec3::new(0.1, 0.2, 0.3));
        let s0 = FullState::new(a, ReducedStateC::new([1.0, 2.0, 3.0], 0.5, -1.0));
        let traj = integrate_lie_rkmk4(
            |_: &FullStateC, _| Ok((Vec3::zeros(), TangentC::zero())),
            s0,
            &StepConfig::new(0.1, 50),
            &p,
        )
        .unwrap();
        assert!(traj.samples.iter().all(|x| x.state == s0));
    }

    #[test]
    fn rk4_reference_scenario_conserves() {
        let p = reference(0.0);
        let s0 = ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0);
        let traj = simulate_reduced(s0, &p, &Control::None, &StepConfig::new(1e-3, 10_000)).unwrap();
        let h0 = hamiltonian_c(&s0, &p);
        let c0 = s0.pi.norm_squared();
        for x in &traj.samples {
            assert!((x.diagnostics.energy - h0).abs() / h0 < 1e-10);
            assert!((x.state.pi.norm_squared() - c0).abs() / c0 < 1e-10);
        }
    }

    #[test]
    fn integration_reports_blow_up_step() {
        let p = reference(0.0);
        let s0 = ReducedStateC::new([1.0, 0.0, 0.0], 0.0, 0.0);
        let blow = |s: &ReducedStateC, _| {
            Ok(TangentC { pi_dot: s.pi * 1e300, alpha_dot: 0.0, l_dot: 0.0 })
        };
        let err = integrate_rk4(blow, s0, &StepConfig::new(1.0, 10), &p).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: Some(_), .. }), "{err}");
    }

    #[test]
    fn step_config_validation() {
        let p = reference(0.0);
        let s0 = ReducedStateC::new([1.0, 0.0, 0.0], 0.0, 0.0);
        for cfg in [StepConfig::new(-1.0, 10), StepConfig::new(0.1, 0), StepConfig { stride: 0, ..StepConfig::new(0.1, 1) }] {
            assert!(simulate_reduced(s0, &p, &Control::None, &cfg).is_err());
        }
    }

    #[test]
    fn stride_controls_sampling() {
        let p = reference(0.0);
        let s0 = ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0);
        let cfg = StepConfig { stride: 10, ..StepConfig::new(1e-2, 100) };
        let traj = simulate_reduced(s0, &p, &Control::None, &cfg).unwrap();
        assert_eq!(traj.len(), 11);
        assert!((traj.last().t - 1.0).abs() < 1e-15);
    }
}
