//! Residual evaluators for the Type I and Type II Hamilton-Jacobi equations
//! on the reduced Poisson manifolds, with closedness and Poisson-map
//! diagnostics for their ingredient maps.
//!
//! A reduced covector `γ̄` uses the same flat layout as the reduced states:
//! `[Π, α, l]` or `[Π, Γ, α, l]`. Configuration chart points are
//! `[θ₁, θ₂, θ₃, α]` with `A = A₀·exp(hat(θ))`.

use std::sync::Arc;

use crate::brackets::{bracket_product_c_from_gradients, bracket_product_n_from_gradients, fd_step, numerical_gradient};
use crate::dynamics::{controlled_field, rk4_step, Control, RotorDynamics};
use crate::error::{Error, Result};
use crate::lie::{exp_so3, right_jacobian, Rotation, Vec3};
use crate::model::{Case, Coordinates, InertiaParams, ReducedStateC, ReducedStateN};

/// A self-map of a reduced Poisson manifold in flat coordinates.
pub type PointMap = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Both sides of the coincident Type I equation at `γ̄`.
///
/// The left side is written over the unreduced covector indices
/// (`γ₄..γ₆ = Π`, `γ₇ = α`, `γ₈ = l`), the right side over `γ̄₁..γ̄₅`.
pub fn type1_sides_c(gbar: &[f64; 5], p: &InertiaParams) -> ([f64; 5], [f64; 5]) {
    let (i1, i2, i3, j3) = (p.ibar.x, p.ibar.y, p.ibar.z, p.j3);

    // γ₁..γ₃ are attitude slots and never enter the field
    let mut g = [0.0; 9];
    g[4..9].copy_from_slice(gbar);
    let lhs = [
        ((i2 - i3) * g[5] * g[6] - i2 * g[5] * g[8]) / (i2 * i3),
        ((i3 - i1) * g[6] * g[4] + i1 * g[4] * g[8]) / (i3 * i1),
        ((i1 - i2) * g[4] * g[5]) / (i1 * i2),
        -(g[6] - g[8]) / i3 + g[8] / j3,
        0.0,
    ];

    let b = [0.0, gbar[0], gbar[1], gbar[2], gbar[3], gbar[4]];
    let rhs = [
        ((i2 - i3) * b[2] * b[3] - i2 * b[2] * b[5]) / (i2 * i3),
        ((i3 - i1) * b[3] * b[1] + i1 * b[1] * b[5]) / (i3 * i1),
        ((i1 - i2) * b[1] * b[2]) / (i1 * i2),
        -(b[3] - b[5]) / i3 + b[5] / j3,
        0.0,
    ];
    (lhs, rhs)
}

/// Both sides of the non-coincident Type I equation at `γ̄`, with
/// `γ₇..γ₉ = Π`, `γ₁₀..γ₁₂ = Γ`, `γ₁₃ = α`, `γ₁₄ = l` on the left.
pub fn type1_sides_n(gbar: &[f64; 8], p: &InertiaParams) -> ([f64; 8], [f64; 8]) {
    let (i1, i2, i3, j3) = (p.ibar.x, p.ibar.y, p.ibar.z, p.j3);
    let (c1, c2, c3) = (p.chi.x, p.chi.y, p.chi.z);
    let gh = p.gh;

    let mut g = [0.0; 15];
    g[7..15].copy_from_slice(gbar);
    let lhs = [
        ((i2 - i3) * g[8] * g[9] - i2 * g[8] * g[14]) / (i2 * i3) + gh * (g[11] * c3 - g[12] * c2),
        ((i3 - i1) * g[9] * g[7] + i1 * g[7] * g[14]) / (i3 * i1) + gh * (g[12] * c1 - g[10] * c3),
        ((i1 - i2) * g[7] * g[8]) / (i1 * i2) + gh * (g[10] * c2 - g[11] * c1),
        (i2 * g[11] * g[9] - i3 * g[12] * g[8] - i2 * g[11] * g[14]) / (i2 * i3),
        (i3 * g[12] * g[7] - i1 * g[10] * g[9] + i1 * g[10] * g[14]) / (i3 * i1),
        (i1 * g[10] * g[8] - i2 * g[11] * g[7]) / (i1 * i2),
        -(g[9] - g[14]) / i3 + g[14] / j3,
        0.0,
    ];

    let mut b = [0.0; 9];
    b[1..9].copy_from_slice(gbar);
    let rhs = [
        ((i2 - i3) * b[2] * b[3] - i2 * b[2] * b[8]) / (i2 * i3) + gh * (b[5] * c3 - b[6] * c2),
        ((i3 - i1) * b[3] * b[1] + i1 * b[1] * b[8]) / (i3 * i1) + gh * (b[6] * c1 - b[4] * c3),
        ((i1 - i2) * b[1] * b[2]) / (i1 * i2) + gh * (b[4] * c2 - b[5] * c1),
        (i2 * b[5] * b[3] - i3 * b[6] * b[2] - i2 * b[5] * b[8]) / (i2 * i3),
        (i3 * b[6] * b[1] - i1 * b[4] * b[3] + i1 * b[4] * b[8]) / (i3 * i1),
        (i1 * b[4] * b[2] - i2 * b[5] * b[1]) / (i1 * i2),
        -(b[3] - b[8]) / i3 + b[8] / j3,
        0.0,
    ];
    (lhs, rhs)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Max-norm gap between the two Type I transcriptions, coincident case.
pub fn type1_residual_c(gbar: &[f64; 5], p: &InertiaParams) -> f64 {
    let (lhs, rhs) = type1_sides_c(gbar, p);
    max_abs_diff(&lhs, &rhs)
}

/// Max-norm gap between the two Type I transcriptions, non-coincident case.
pub fn type1_residual_n(gbar: &[f64; 8], p: &InertiaParams) -> f64 {
    let (lhs, rhs) = type1_sides_n(gbar, p);
    max_abs_diff(&lhs, &rhs)
}

/// Max-norm of the antisymmetrized Jacobian `∂γᵢ/∂qⱼ − ∂γⱼ/∂qᵢ` of a
/// covector field on a chart, by central differences.
pub fn closedness_residual(gamma: &dyn Fn(&[f64]) -> Vec<f64>, q: &[f64]) -> Result<f64> {
    let jac = jacobian(gamma, q)?;
    let n = q.len();
    Ok((0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| (jac[i][j] - jac[j][i]).abs())
        .fold(0.0, f64::max))
}

/// `J[i][j] = ∂fᵢ/∂xⱼ` by central differences.
pub fn jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let m = f(x).len();
    let mut jac = vec![vec![0.0; x.len()]; m];
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let h = fd_step(x[j]);
        probe[j] = x[j] + h;
        let fp = f(&probe);
        probe[j] = x[j] - h;
        let fm = f(&probe);
        probe[j] = x[j];
        for i in 0..m {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::non_finite("jacobian probe"));
            }
            jac[i][j] = d;
        }
    }
    Ok(jac)
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn poisson_from_gradients(case: Case, x: &[f64], df: &[f64], dk: &[f64]) -> f64 {
    match case {
        Case::Coincident => bracket_product_c_from_gradients(x, df, dk),
        Case::Noncoincident => bracket_product_n_from_gradients(x, df, dk),
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// A section of `T*Q` expressed as a reduced covector over the chart
/// `q = [θ, α]`, `A = A₀·exp(hat(θ))`.
#[derive(Clone)]
pub struct ReducedOneForm {
    pub case: Case,
    pub reference: Rotation,
    map: Arc<PointMap>,
}

impl std::fmt::Debug for ReducedOneForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReducedOneForm")
            .field("case", &self.case)
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

impl ReducedOneForm {
    /// Wraps a map from chart points to reduced covectors
    /// (`[Π, α, l]` or `[Π, Γ, α, l]`).
    pub fn new(case: Case, reference: Rotation, map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        ReducedOneForm {
            case,
            reference,
            map: Arc::new(map),
        }
    }

    /// The differential of a generating function `W(θ, α)`, with gradients
    /// by central differences. In the non-coincident case `Γ = Aᵀ·gravity`.
    pub fn from_generating_function(
        case: Case,
        reference: Rotation,
        gravity: Vec3,
        w: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let r0 = reference;
        let map = move |q: &[f64]| {
            let theta = Vec3::new(q[0], q[1], q[2]);
            let dw = numerical_gradient(&w, q).unwrap_or_else(|_| vec![f64::NAN; 4]);
            let jt = right_jacobian(&theta).transpose();
            let pi = jt
                .try_inverse()
                .map(|inv| inv * Vec3::new(dw[0], dw[1], dw[2]))
                .unwrap_or_else(|| Vec3::repeat(f64::NAN));
            let l = dw[3];
            match case {
                Case::Coincident => vec![pi.x, pi.y, pi.z, q[3], l],
                Case::Noncoincident => {
                    let a = r0.compose(&exp_so3(&theta));
                    let g = a.transpose().apply(&gravity);
                    vec![pi.x, pi.y, pi.z, g.x, g.y, g.z, q[3], l]
                }
            }
        };
        ReducedOneForm::new(case, reference, map)
    }

    pub fn evaluate(&self, q: &[f64]) -> Vec<f64> {
        (self.map)(q)
    }

    pub fn attitude(&self, q: &[f64]) -> Rotation {
        self.reference.compose(&exp_so3(&Vec3::new(q[0], q[1], q[2])))
    }

    /// The one-form in chart components, `(J_r(θ)ᵀ·Π, l)`.
    pub fn chart_covector(&self, q: &[f64]) -> Vec<f64> {
        let g = self.evaluate(q);
        let pi = Vec3::new(g[0], g[1], g[2]);
        let c = right_jacobian(&Vec3::new(q[0], q[1], q[2])).transpose() * pi;
        vec![c.x, c.y, c.z, g[g.len() - 1]]
    }

    pub fn closedness_residual(&self, q: &[f64]) -> Result<f64> {
        closedness_residual(&|x: &[f64]| self.chart_covector(x), q)
    }

    /// `‖A·Π − μ‖∞`: distance of `γ(q)` from the momentum level `J⁻¹(μ)`.
    pub fn momentum_level_residual(&self, q: &[f64], mu: &Vec3) -> f64 {
        let g = self.evaluate(q);
        (self.attitude(q).apply(&Vec3::new(g[0], g[1], g[2])) - mu).amax()
    }

    pub fn type1_residual(&self, q: &[f64], p: &InertiaParams) -> f64 {
        let g = self.evaluate(q);
        match self.case {
            Case::Coincident => type1_residual_c(&g[..].try_into().expect("5 slots"), p),
            Case::Noncoincident => type1_residual_n(&g[..].try_into().expect("8 slots"), p),
        }
    }
}

/// Dual Type II residuals at `s` for maps `ε̄`, `λ̄` and the controlled field
/// `X̃`.
///
/// `lhs_res = ‖Jε̄(s)·X_{h∘ε̄}(s) − Jλ̄(ε̄(s))·X̃(ε̄(s))‖∞`, where
/// `X_{h∘ε̄}` comes from the product bracket with a finite-difference
/// gradient of `h∘ε̄`.
///
/// `rhs_res = maxᵢ |{ε̄ᵢ, h∘ε̄}(s) − (Jλ̄(ε̄(s))·X̃(ε̄(s)))ᵢ|`: the pushforward
/// evaluated as a derivation on coordinate functions, one bracket of
/// composites per slot.
pub fn type2_residual<R: RotorDynamics>(
    eps: &PointMap,
    lam: &PointMap,
    s: &R,
    p: &InertiaParams,
    u: &Control,
) -> Result<(f64, f64)> {
    let case = R::CASE;
    let x = s.coords();
    let ex = eps(&x);
    if ex.len() != R::DIM || ex.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("point map"));
    }
    let target = {
        let e_state = R::from_coords(&ex);
        let xt = controlled_field(&e_state, p, u, 0.0)?.coords();
        let jl = jacobian(lam, &ex)?;
        mat_vec(&jl, &xt)
    };

    let h_eps = |y: &[f64]| R::from_coords(&eps(y)).hamiltonian(p);
    let dh = numerical_gradient(h_eps, &x)?;

    let x_heps: Vec<f64> = (0..R::DIM)
        .map(|i| poisson_from_gradients(case, &x, &unit(R::DIM, i), &dh))
        .collect();
    let je = jacobian(eps, &x)?;
    let lhs = max_abs_diff(&mat_vec(&je, &x_heps), &target);

    let mut rhs: f64 = 0.0;
    for (i, t) in target.iter().enumerate() {
        let d_eps_i = numerical_gradient(|y: &[f64]| eps(y)[i], &x)?;
        rhs = rhs.max((poisson_from_gradients(case, &x, &d_eps_i, &dh) - t).abs());
    }
    if !(lhs.is_finite() && rhs.is_finite()) {
        return Err(Error::non_finite("type II residual"));
    }
    Ok((lhs, rhs))
}

pub fn type2_residual_c(
    eps: &PointMap,
    lam: &PointMap,
    s: &ReducedStateC,
    p: &InertiaParams,
    u: &Control,
) -> Result<(f64, f64)> {
    type2_residual(eps, lam, s, p, u)
}

pub fn type2_residual_n(
    eps: &PointMap,
    lam: &PointMap,
    s: &ReducedStateN,
    p: &InertiaParams,
    u: &Control,
) -> Result<(f64, f64)> {
    type2_residual(eps, lam, s, p, u)
}

/// `max_{i<j} |{εᵢ, εⱼ}(s) − {xᵢ, xⱼ}(ε(s))|` over coordinate functions.
pub fn poisson_map_residual(eps: &PointMap, s: &[f64], case: Case) -> Result<f64> {
    let n = s.len();
    let ex = eps(s);
    if ex.len() != n || ex.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("point map"));
    }
    let rows = jacobian(eps, s)?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let pulled = poisson_from_gradients(case, s, &rows[i], &rows[j]);
            let pushed = poisson_from_gradients(case, &ex, &unit(n, i), &unit(n, j));
            worst = worst.max((pulled - pushed).abs());
        }
    }
    Ok(worst)
}

pub fn identity_map() -> Arc<PointMap> {
    Arc::new(|x: &[f64]| x.to_vec())
}

/// Time-`t` flow of the uncontrolled reduced field, by RK4 at step `dt`.
pub fn flow_map<R: RotorDynamics>(p: InertiaParams, t: f64, dt: f64) -> Arc<PointMap> {
    let steps = (t / dt).round().max(1.0) as usize;
    let h = t / steps as f64;
    Arc::new(move |x: &[f64]| {
        let field = |s: &R, _t: f64| Ok(s.reduced_field(&p));
        let mut s = R::from_coords(x);
        for n in 0..steps {
            s = rk4_step(&field, &s, n as f64 * h, h).expect("uncontrolled field is infallible");
        }
        s.coords()
    })
}

/// `Π ↦ c·Π`, all other slots unchanged; not a Poisson map unless `c = 1`.
pub fn scaling_map(c: f64) -> Arc<PointMap> {
    Arc::new(move |x: &[f64]| {
        let mut y = x.to_vec();
        for v in &mut y[..3] {
            *v *= c;
        }
        y
    })
}

/// `second ∘ first`.
pub fn compose(first: Arc<PointMap>, second: Arc<PointMap>) -> Arc<PointMap> {
    Arc::new(move |x: &[f64]| second(&first(x)))
}
