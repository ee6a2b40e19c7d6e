//! so(3) / SO(3) primitives.
//!
//! Vectors are plain `nalgebra` 3-vectors. Attitudes are stored as full 3x3
//! matrices wrapped in [`Rotation`]; the integrators produce intermediate
//! stage matrices that are only approximately orthogonal, so the wrapper
//! offers an unchecked constructor next to the validating one.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance used by [`Rotation::new`] for orthogonality and unit determinant.
pub const ROTATION_TOL: f64 = 1e-12;

/// Below this angle `exp_so3` switches to its Taylor branch.
pub const SMALL_ANGLE: f64 = 1e-8;

const SKEW_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Validating constructor: `RᵀR = I` and `det R = 1` within [`ROTATION_TOL`].
    pub fn new(m: Mat3) -> Result<Self> {
        let orth = orthogonality_residual(&m);
        let det = m.determinant();
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::non_finite("rotation matrix"));
        }
        if orth > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::Degenerate(format!(
                "not a rotation: |RᵀR - I| = {orth:e}, det = {det}"
            )));
        }
        Ok(Rotation(m))
    }

    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Max-norm of `RᵀR - I`.
    pub fn orthogonality_residual(&self) -> f64 {
        orthogonality_residual(&self.0)
    }
}

impl From<Rotation> for Mat3 {
    fn from(r: Rotation) -> Mat3 {
        r.0
    }
}

pub fn orthogonality_residual(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).amax()
}

pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn vee(m: &Mat3) -> Result<Vec3> {
    let asymmetry = (m + m.transpose()).amax();
    if asymmetry >= SKEW_TOL {
        return Err(Error::NotSkew { asymmetry });
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Rodrigues formula, `exp(hat(v))`.
pub fn exp_so3(v: &Vec3) -> Rotation {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let k = hat(v);
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Rotation(Mat3::identity() + k * a + k * k * b)
}

/// Right Jacobian of the exponential map: for `R(s) = exp(hat(θ + s·v))`,
/// `Rᵀ dR/ds |₀ = hat(right_jacobian(θ)·v)`.
pub fn right_jacobian(v: &Vec3) -> Mat3 {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let k = hat(v);
    let (a, b) = if theta < 1e-4 {
        (0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0)
    } else {
        (
            (1.0 - theta.cos()) / theta2,
            (theta - theta.sin()) / (theta2 * theta),
        )
    };
    Mat3::identity() - k * a + k * k * b
}

/// Nearest rotation in the Frobenius norm (orthogonal polar factor).
pub fn reorthonormalize(m: &Mat3) -> Result<Rotation> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::non_finite("reorthonormalize input"));
    }
    let det = m.determinant();
    if det <= 0.0 {
        return Err(Error::Degenerate(format!("det = {det} is not positive")));
    }
    let svd = m.svd(true, true);
    let smallest = svd.singular_values.min();
    if smallest <= f64::EPSILON * svd.singular_values.max() {
        return Err(Error::Degenerate("rank-deficient matrix".into()));
    }
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Degenerate("SVD failed".into())),
    };
    Ok(Rotation(u * v_t))
}

/// Body-to-spatial transport of angular momentum, `A·Π`.
pub fn spatial_momentum(a: &Rotation, pi: &Vec3) -> Vec3 {
    a.apply(pi)
}
