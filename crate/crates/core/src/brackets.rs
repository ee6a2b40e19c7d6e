//! Lie-Poisson and canonical brackets on the two reduced manifolds.
//!
//! Brackets accept arbitrary [`ScalarField`]s over the flat coordinate
//! layouts documented in [`crate::model`]. Gradients default to central
//! differences with step `1e-6·max(1, |xᵢ|)`; coordinate functions override
//! this with their exact gradient so that
//! [`hamiltonian_vf_via_bracket`] only approximates `∇H`.
//!
//! The Jacobi identity holds analytically for all brackets here but is not
//! checked numerically: nested finite differences are too noisy.

use crate::error::{Error, Result};
use crate::lie::Vec3;
use crate::model::{Case, Coordinates, ReducedStateC, ReducedStateN};

/// A real-valued function on a flat coordinate space.
///
/// Implementations must be safe to evaluate concurrently.
pub trait ScalarField: Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        numerical_gradient(|y| self.value(y), x)
    }
}

impl<F> ScalarField for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// The coordinate function `x ↦ x[index]`, with its exact gradient.
#[derive(Debug, Clone, Copy)]
pub struct Coordinate(pub usize);

impl ScalarField for Coordinate {
    fn value(&self, x: &[f64]) -> f64 {
        x[self.0]
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        g[self.0] = 1.0;
        Ok(g)
    }
}

/// Central-difference step for coordinate value `x`.
pub fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

pub fn numerical_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        let d = (fp - fm) / (2.0 * h);
        if !d.is_finite() {
            return Err(Error::non_finite("scalar field gradient"));
        }
        g.push(d);
    }
    Ok(g)
}

fn v3(g: &[f64], offset: usize) -> Vec3 {
    Vec3::new(g[offset], g[offset + 1], g[offset + 2])
}

fn lie_poisson_so3(pi: &Vec3, df: &Vec3, dk: &Vec3) -> f64 {
    -pi.dot(&df.cross(dk))
}

fn heavy_top_coupling(gamma: &Vec3, df_pi: &Vec3, df_gamma: &Vec3, dk_pi: &Vec3, dk_gamma: &Vec3) -> f64 {
    -gamma.dot(&(df_pi.cross(dk_gamma) - dk_pi.cross(df_gamma)))
}

fn canonical(df_alpha: f64, df_l: f64, dk_alpha: f64, dk_l: f64) -> f64 {
    df_alpha * dk_l - dk_alpha * df_l
}

/// Rigid-body bracket `{F,K}(Π) = -Π·(∇F × ∇K)` for fields over `[Π₁, Π₂, Π₃]`.
pub fn bracket_so3(f: &dyn ScalarField, k: &dyn ScalarField, pi: &Vec3) -> Result<f64> {
    let x = pi.as_slice();
    let df = f.gradient(x)?;
    let dk = k.gradient(x)?;
    Ok(lie_poisson_so3(pi, &v3(&df, 0), &v3(&dk, 0)))
}

/// Canonical bracket on `T*ℝ` for fields over `[α, l]`.
pub fn bracket_canonical_r(f: &dyn ScalarField, k: &dyn ScalarField, alpha: f64, l: f64) -> Result<f64> {
    let x = [alpha, l];
    let df = f.gradient(&x)?;
    let dk = k.gradient(&x)?;
    Ok(canonical(df[0], df[1], dk[0], dk[1]))
}

/// Heavy-top bracket for fields over `[Π₁, Π₂, Π₃, Γ₁, Γ₂, Γ₃]`.
pub fn bracket_se3(f: &dyn ScalarField, k: &dyn ScalarField, pi: &Vec3, gamma: &Vec3) -> Result<f64> {
    let x = [pi.x, pi.y, pi.z, gamma.x, gamma.y, gamma.z];
    let df = f.gradient(&x)?;
    let dk = k.gradient(&x)?;
    let (fp, fg, kp, kg) = (v3(&df, 0), v3(&df, 3), v3(&dk, 0), v3(&dk, 3));
    Ok(lie_poisson_so3(pi, &fp, &kp) + heavy_top_coupling(gamma, &fp, &fg, &kp, &kg))
}

/// Product bracket on `so*(3) × ℝ × ℝ*` for fields over `[Π, α, l]`.
pub fn bracket_product_c(f: &dyn ScalarField, k: &dyn ScalarField, s: &ReducedStateC) -> Result<f64> {
    let x = s.coords();
    let df = f.gradient(&x)?;
    let dk = k.gradient(&x)?;
    Ok(bracket_product_c_from_gradients(&x, &df, &dk))
}

/// Product bracket on `se*(3) × ℝ × ℝ*` for fields over `[Π, Γ, α, l]`.
pub fn bracket_product_n(f: &dyn ScalarField, k: &dyn ScalarField, s: &ReducedStateN) -> Result<f64> {
    let x = s.coords();
    let df = f.gradient(&x)?;
    let dk = k.gradient(&x)?;
    Ok(bracket_product_n_from_gradients(&x, &df, &dk))
}

pub(crate) fn bracket_product_c_from_gradients(x: &[f64], df: &[f64], dk: &[f64]) -> f64 {
    lie_poisson_so3(&v3(x, 0), &v3(df, 0), &v3(dk, 0)) + canonical(df[3], df[4], dk[3], dk[4])
}

pub(crate) fn bracket_product_n_from_gradients(x: &[f64], df: &[f64], dk: &[f64]) -> f64 {
    let (fp, fg, kp, kg) = (v3(df, 0), v3(df, 3), v3(dk, 0), v3(dk, 3));
    lie_poisson_so3(&v3(x, 0), &fp, &kp)
        + heavy_top_coupling(&v3(x, 3), &fp, &fg, &kp, &kg)
        + canonical(df[6], df[7], dk[6], dk[7])
}

/// Product bracket of the given case on flat coordinates.
pub fn bracket_product(case: Case, f: &dyn ScalarField, k: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    let df = f.gradient(x)?;
    let dk = k.gradient(x)?;
    Ok(match case {
        Case::Coincident => bracket_product_c_from_gradients(x, &df, &dk),
        Case::Noncoincident => bracket_product_n_from_gradients(x, &df, &dk),
    })
}

pub fn dimension(case: Case) -> usize {
    match case {
        Case::Coincident => ReducedStateC::DIM,
        Case::Noncoincident => ReducedStateN::DIM,
    }
}

/// `ẋᵢ = {xᵢ, H}` for every coordinate of the flat point `x`.
///
/// `∇H` is evaluated once and reused for all coordinate slots.
pub fn hamiltonian_vf_via_bracket(h: &dyn ScalarField, x: &[f64], case: Case) -> Result<Vec<f64>> {
    assert_eq!(x.len(), dimension(case), "state dimension does not match case");
    let dh = h.gradient(x)?;
    (0..x.len())
        .map(|i| {
            let di = Coordinate(i).gradient(x)?;
            let v = match case {
                Case::Coincident => bracket_product_c_from_gradients(x, &di, &dh),
                Case::Noncoincident => bracket_product_n_from_gradients(x, &di, &dh),
            };
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::non_finite("bracket vector field"))
            }
        })
        .collect()
}
