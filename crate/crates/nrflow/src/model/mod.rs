//! Vehicle models and the plant interface.
//!
//! States live in an NED (north-east-down) world frame: positive z points
//! down, so level thrust produces a negative vertical acceleration. Attitude
//! is Euler angles (roll φ, pitch θ, yaw ψ) with an explicit guard on the
//! pitch singularity at |θ| = π/2.

mod blimp;
mod quadrotor;
pub mod analytic;

pub use blimp::{blimp_f, Blimp, BlimpParams, BLIMP_DIM_X};
pub use quadrotor::{quad_f, Quadrotor, QuadrotorParams, QUAD_DIM_X};

use crate::math::Scalar;
use nalgebra::{DVector, Vector4};
use thiserror::Error;

/// State vector: 9 entries (quadrotor) or 12 entries (blimp), SI units.
pub type StateVec = DVector<f64>;
/// Input vector: forces+torque (blimp) or thrust+body rates (quadrotor).
pub type InputVec = Vector4<f64>;
/// Output vector: world position (x, y, z) and yaw ψ.
pub type OutputVec = Vector4<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    /// Pitch angle too close to ±π/2 for the Euler-rate transformation.
    #[error("singular attitude: |theta| = {theta:.6} within {margin:.1e} of pi/2")]
    SingularAttitude { theta: f64, margin: f64 },
    /// Mass/inertia matrix failed positive-definiteness at construction.
    #[error("mass matrix is not symmetric positive definite")]
    NonPdMass,
    /// Parameter set rejected at construction.
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    /// Dimension mismatch between a state/input and the plant.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Continuous-time plant with 4 inputs and 4 outputs (position + yaw).
///
/// Dynamics and output map are generic over the scalar type so that the same
/// code path serves plain evaluation and dual-number differentiation.
pub trait Plant {
    /// State dimension.
    fn dim_x(&self) -> usize;

    /// Writes dx = f(x, u) into `dx`. `x` and `dx` have length `dim_x()`.
    fn dynamics<S: Scalar>(&self, x: &[S], u: &[S; 4], dx: &mut [S]) -> Result<(), ModelError>;

    /// Output map h(x) -> (p_x, p_y, p_z, ψ).
    fn output<S: Scalar>(&self, x: &[S]) -> [S; 4];

    fn check_dim(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.dim_x() {
            return Err(ModelError::DimensionMismatch { expected: self.dim_x(), got: x.len() });
        }
        Ok(())
    }
}

/// Euler-angle rates from body angular velocity: (φ̇, θ̇, ψ̇) = T(φ, θ)·ω_b with
///
/// ```text
///     | 1   sφ·tθ   cφ·tθ  |
/// T = | 0   cφ      -sφ    |
///     | 0   sφ/cθ   cφ/cθ  |
/// ```
///
/// Errors with `SingularAttitude` when |θ| ≥ π/2 − margin.
pub fn euler_rates<S: Scalar>(
    phi: S,
    theta: S,
    omega_b: &[S; 3],
    margin: f64,
) -> Result<[S; 3], ModelError> {
    if theta.re().abs() >= std::f64::consts::FRAC_PI_2 - margin {
        return Err(ModelError::SingularAttitude { theta: theta.re(), margin });
    }
    let (sp, cp) = (phi.sin(), phi.cos());
    let tt = theta.tan();
    let ct = theta.cos();
    let (p, q, r) = (omega_b[0], omega_b[1], omega_b[2]);
    Ok([
        p + sp * tt * q + cp * tt * r,
        cp * q - sp * r,
        (sp * q + cp * r) / ct,
    ])
}

/// Rotation matrix from body to world frame, R = Rz(ψ)·Ry(θ)·Rx(φ), applied
/// to a body vector. Returned as the rotated world-frame vector.
pub fn rotate_body_to_world<S: Scalar>(phi: S, theta: S, psi: S, v: &[S; 3]) -> [S; 3] {
    let (sp, cp) = (phi.sin(), phi.cos());
    let (st, ct) = (theta.sin(), theta.cos());
    let (ss, cs) = (psi.sin(), psi.cos());
    let (x, y, z) = (v[0], v[1], v[2]);
    [
        cs * ct * x + (cs * st * sp - ss * cp) * y + (cs * st * cp + ss * sp) * z,
        ss * ct * x + (ss * st * sp + cs * cp) * y + (ss * st * cp - cs * sp) * z,
        -st * x + ct * sp * y + ct * cp * z,
    ]
}

/// Transpose (world-to-body) rotation applied to a world vector.
pub fn rotate_world_to_body<S: Scalar>(phi: S, theta: S, psi: S, v: &[S; 3]) -> [S; 3] {
    let (sp, cp) = (phi.sin(), phi.cos());
    let (st, ct) = (theta.sin(), theta.cos());
    let (ss, cs) = (psi.sin(), psi.cos());
    let (x, y, z) = (v[0], v[1], v[2]);
    [
        cs * ct * x + ss * ct * y - st * z,
        (cs * st * sp - ss * cp) * x + (ss * st * sp + cs * cp) * y + ct * sp * z,
        (cs * st * cp + ss * sp) * x + (ss * st * cp - cs * sp) * y + ct * cp * z,
    ]
}

/// Evaluates a memoryless map y = g(u). Used by the flow-law property tests
/// with identity, cubic, and affine maps.
pub fn memoryless_eval<G>(g: G, u: &DVector<f64>) -> DVector<f64>
where
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    g(u)
}

/// True when every input channel lies in `[min, max]` up to `tol`.
pub fn input_in_box(u: &InputVec, min: &InputVec, max: &InputVec, tol: f64) -> bool {
    (0..4).all(|i| u[i] >= min[i] - tol && u[i] <= max[i] + tol)
}
