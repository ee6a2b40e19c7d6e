//! Physical parameters, the two Hamiltonians and the Legendre transform.
//!
//! Coordinates on the reduced Poisson manifolds are flattened in a fixed
//! order, used by the brackets, the Hamilton-Jacobi evaluators and the CSV
//! writer alike:
//!
//! * coincident centers: `[Π₁, Π₂, Π₃, α, l]`
//! * non-coincident centers: `[Π₁, Π₂, Π₃, Γ₁, Γ₂, Γ₃, α, l]`

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Coincident centers of buoyancy and gravity (`so*(3) × ℝ × ℝ*`).
    Coincident,
    /// Non-coincident centers (`se*(3) × ℝ × ℝ*`).
    Noncoincident,
}

/// Principal augmented inertias, rotor inertia and the gravity offset.
///
/// `gh` is the product of gravitational acceleration and offset length; the
/// carrier mass is normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaParams {
    pub ibar: Vec3,
    pub j3: f64,
    pub gh: f64,
    pub chi: Vec3,
}

impl InertiaParams {
    pub fn new(ibar: [f64; 3], j3: f64, gh: f64, chi: [f64; 3]) -> Result<Self> {
        let p = InertiaParams {
            ibar: Vec3::from(ibar),
            j3,
            gh,
            chi: Vec3::from(chi),
        };
        p.validate()?;
        Ok(p)
    }

    /// Coincident-case parameters: `gh = 0`, `χ = e₃`.
    pub fn coincident(ibar: [f64; 3], j3: f64) -> Result<Self> {
        Self::new(ibar, j3, 0.0, [0.0, 0.0, 1.0])
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.ibar.iter().chain(self.chi.iter()).all(|x| x.is_finite())
            && self.j3.is_finite()
            && self.gh.is_finite();
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.ibar.iter().any(|&i| i <= 0.0) {
            return Err(Error::InvalidParams(format!(
                "augmented inertias must be positive, got {:?}",
                self.ibar.as_slice()
            )));
        }
        if self.j3 <= 0.0 {
            return Err(Error::InvalidParams(format!("J3 must be positive, got {}", self.j3)));
        }
        if self.gh < 0.0 {
            return Err(Error::InvalidParams(format!("gh must be non-negative, got {}", self.gh)));
        }
        if (self.chi.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "chi must be a unit vector, |chi| = {}",
                self.chi.norm()
            )));
        }
        Ok(())
    }

    /// `Ω = (Π₁/Ī₁, Π₂/Ī₂, (Π₃ - l)/Ī₃)`, which is also `∇_Π H`.
    pub fn body_rate(&self, pi: &Vec3, l: f64) -> Vec3 {
        Vec3::new(
            pi.x / self.ibar.x,
            pi.y / self.ibar.y,
            (pi.z - l) / self.ibar.z,
        )
    }

    /// `∂H/∂l = -(Π₃ - l)/Ī₃ + l/J₃`, the rotor angle rate.
    pub fn rotor_rate(&self, pi: &Vec3, l: f64) -> f64 {
        -(pi.z - l) / self.ibar.z + l / self.j3
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityState {
    pub omega: Vec3,
    pub alpha: f64,
    pub alpha_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedStateC {
    pub pi: Vec3,
    pub alpha: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedStateN {
    pub pi: Vec3,
    pub gamma: Vec3,
    pub alpha: f64,
    pub l: f64,
}

impl ReducedStateC {
    pub fn new(pi: [f64; 3], alpha: f64, l: f64) -> Self {
        ReducedStateC {
            pi: Vec3::from(pi),
            alpha,
            l,
        }
    }
}

impl ReducedStateN {
    pub fn new(pi: [f64; 3], gamma: [f64; 3], alpha: f64, l: f64) -> Self {
        ReducedStateN {
            pi: Vec3::from(pi),
            gamma: Vec3::from(gamma),
            alpha,
            l,
        }
    }

    pub fn coincident_part(&self) -> ReducedStateC {
        ReducedStateC {
            pi: self.pi,
            alpha: self.alpha,
            l: self.l,
        }
    }
}

/// Time derivative of a [`ReducedStateC`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentC {
    pub pi_dot: Vec3,
    pub alpha_dot: f64,
    pub l_dot: f64,
}

/// Time derivative of a [`ReducedStateN`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentN {
    pub pi_dot: Vec3,
    pub gamma_dot: Vec3,
    pub alpha_dot: f64,
    pub l_dot: f64,
}

/// Flat-coordinate access shared by reduced states and their tangents.
pub trait Coordinates: Copy + Debug + Send + Sync + 'static {
    const DIM: usize;

    fn coords(&self) -> Vec<f64>;

    /// Panics if `c.len() != DIM`.
    fn from_coords(c: &[f64]) -> Self;

    fn is_finite(&self) -> bool {
        self.coords().iter().all(|x| x.is_finite())
    }
}

/// Vector-space operations the integrators need on tangents.
pub trait Tangent:
    Coordinates + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self {
        Self::from_coords(&vec![0.0; Self::DIM])
    }

    /// Index of `l̇` in the flat layout.
    const L_INDEX: usize = Self::DIM - 1;

    fn l_dot(&self) -> f64 {
        self.coords()[Self::L_INDEX]
    }

    fn with_l_dot(&self, l_dot: f64) -> Self {
        let mut c = self.coords();
        c[Self::L_INDEX] = l_dot;
        Self::from_coords(&c)
    }
}

/// A point of one of the two reduced Poisson manifolds.
pub trait ReducedState: Coordinates {
    type Tangent: Tangent;
    const CASE: Case;

    fn pi(&self) -> Vec3;
    fn alpha(&self) -> f64;
    fn l(&self) -> f64;
    /// Γ for the non-coincident case.
    fn gamma(&self) -> Option<Vec3>;

    fn hamiltonian(&self, p: &InertiaParams) -> f64;

    /// `self + h·d`.
    fn advance(&self, d: &Self::Tangent, h: f64) -> Self {
        let x = self.coords();
        let dx = d.coords();
        let y: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + h * b).collect();
        Self::from_coords(&y)
    }
}

macro_rules! impl_linear {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                let a = self.coords();
                let b = o.coords();
                <$t>::from_coords(&a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>())
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                let a = self.coords();
                let b = o.coords();
                <$t>::from_coords(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>())
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, k: f64) -> $t {
                <$t>::from_coords(&self.coords().iter().map(|x| x * k).collect::<Vec<_>>())
            }
        }
        impl Tangent for $t {}
    };
}

impl Coordinates for ReducedStateC {
    const DIM: usize = 5;
    fn coords(&self) -> Vec<f64> {
        vec![self.pi.x, self.pi.y, self.pi.z, self.alpha, self.l]
    }
    fn from_coords(c: &[f64]) -> Self {
        assert_eq!(c.len(), Self::DIM, "coincident state has 5 coordinates");
        ReducedStateC::new([c[0], c[1], c[2]], c[3], c[4])
    }
}

impl Coordinates for ReducedStateN {
    const DIM: usize = 8;
    fn coords(&self) -> Vec<f64> {
        vec![
            self.pi.x, self.pi.y, self.pi.z, self.gamma.x, self.gamma.y, self.gamma.z, self.alpha,
            self.l,
        ]
    }
    fn from_coords(c: &[f64]) -> Self {
        assert_eq!(c.len(), Self::DIM, "non-coincident state has 8 coordinates");
        ReducedStateN::new([c[0], c[1], c[2]], [c[3], c[4], c[5]], c[6], c[7])
    }
}

impl Coordinates for TangentC {
    const DIM: usize = 5;
    fn coords(&self) -> Vec<f64> {
        vec![self.pi_dot.x, self.pi_dot.y, self.pi_dot.z, self.alpha_dot, self.l_dot]
    }
    fn from_coords(c: &[f64]) -> Self {
        assert_eq!(c.len(), Self::DIM);
        TangentC {
            pi_dot: Vec3::new(c[0], c[1], c[2]),
            alpha_dot: c[3],
            l_dot: c[4],
        }
    }
}

impl Coordinates for TangentN {
    const DIM: usize = 8;
    fn coords(&self) -> Vec<f64> {
        vec![
            self.pi_dot.x,
            self.pi_dot.y,
            self.pi_dot.z,
            self.gamma_dot.x,
            self.gamma_dot.y,
            self.gamma_dot.z,
            self.alpha_dot,
            self.l_dot,
        ]
    }
    fn from_coords(c: &[f64]) -> Self {
        assert_eq!(c.len(), Self::DIM);
        TangentN {
            pi_dot: Vec3::new(c[0], c[1], c[2]),
            gamma_dot: Vec3::new(c[3], c[4], c[5]),
            alpha_dot: c[6],
            l_dot: c[7],
        }
    }
}

impl_linear!(TangentC);
impl_linear!(TangentN);

impl ReducedState for ReducedStateC {
    type Tangent = TangentC;
    const CASE: Case = Case::Coincident;

    fn pi(&self) -> Vec3 {
        self.pi
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn l(&self) -> f64 {
        self.l
    }
    fn gamma(&self) -> Option<Vec3> {
        None
    }
    fn hamiltonian(&self, p: &InertiaParams) -> f64 {
        hamiltonian_c(self, p)
    }
}

impl ReducedState for ReducedStateN {
    type Tangent = TangentN;
    const CASE: Case = Case::Noncoincident;

    fn pi(&self) -> Vec3 {
        self.pi
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn l(&self) -> f64 {
        self.l
    }
    fn gamma(&self) -> Option<Vec3> {
        Some(self.gamma)
    }
    fn hamiltonian(&self, p: &InertiaParams) -> f64 {
        hamiltonian_n(self, p)
    }
}

pub fn legendre_forward(v: &VelocityState, p: &InertiaParams) -> ReducedStateC {
    let l = p.j3 * (v.omega.z + v.alpha_dot);
    ReducedStateC {
        pi: Vec3::new(
            p.ibar.x * v.omega.x,
            p.ibar.y * v.omega.y,
            p.ibar.z * v.omega.z + l,
        ),
        alpha: v.alpha,
        l,
    }
}

pub fn legendre_inverse(s: &ReducedStateC, p: &InertiaParams) -> VelocityState {
    let omega = p.body_rate(&s.pi, s.l);
    VelocityState {
        omega,
        alpha: s.alpha,
        alpha_dot: s.l / p.j3 - omega.z,
    }
}

/// `H = ½[Π₁²/Ī₁ + Π₂²/Ī₂ + (Π₃ - l)²/Ī₃ + l²/J₃]`.
pub fn hamiltonian_c(s: &ReducedStateC, p: &InertiaParams) -> f64 {
    let d = s.pi.z - s.l;
    0.5 * (s.pi.x * s.pi.x / p.ibar.x
        + s.pi.y * s.pi.y / p.ibar.y
        + d * d / p.ibar.z
        + s.l * s.l / p.j3)
}

/// Coincident Hamiltonian plus the potential `gh Γ·χ`.
pub fn hamiltonian_n(s: &ReducedStateN, p: &InertiaParams) -> f64 {
    hamiltonian_c(&s.coincident_part(), p) + p.gh * s.gamma.dot(&p.chi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientC {
    pub d_pi: Vec3,
    pub d_alpha: f64,
    pub d_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientN {
    pub d_pi: Vec3,
    pub d_gamma: Vec3,
    pub d_alpha: f64,
    pub d_l: f64,
}

pub fn grad_hamiltonian_c(s: &ReducedStateC, p: &InertiaParams) -> GradientC {
    GradientC {
        d_pi: p.body_rate(&s.pi, s.l),
        d_alpha: 0.0,
        d_l: p.rotor_rate(&s.pi, s.l),
    }
}

pub fn grad_hamiltonian_n(s: &ReducedStateN, p: &InertiaParams) -> GradientN {
    GradientN {
        d_pi: p.body_rate(&s.pi, s.l),
        d_gamma: p.chi * p.gh,
        d_alpha: 0.0,
        d_l: p.rotor_rate(&s.pi, s.l),
    }
}
