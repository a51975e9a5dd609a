//! 9-state quadrotor: position, velocity, Euler attitude; inputs are net
//! body-z thrust [N] and body angular rates [rad/s].

use super::{euler_rates, ModelError, Plant};
use crate::math::Scalar;
use serde::{Deserialize, Serialize};

/// State layout: (p_x, p_y, p_z, V_x, V_y, V_z, φ, θ, ψ).
pub const QUAD_DIM_X: usize = 9;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadrotorParams {
    /// Mass [kg].
    pub mass: f64,
    /// Gravitational acceleration [m/s²], positive down (NED).
    pub gravity: f64,
    /// Guard margin ε for the pitch singularity: valid |θ| < π/2 − ε.
    pub attitude_margin: f64,
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        Self { mass: 2.1, gravity: 9.81, attitude_margin: 1e-3 }
    }
}

impl QuadrotorParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.mass > 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "quadrotor mass must be positive, got {}",
                self.mass
            )));
        }
        if !(self.gravity > 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "gravity must be positive, got {}",
                self.gravity
            )));
        }
        if !(self.attitude_margin > 0.0) {
            return Err(ModelError::InvalidParams("attitude_margin must be positive".into()));
        }
        Ok(())
    }

    /// Thrust that balances gravity at level attitude.
    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrotor {
    pub params: QuadrotorParams,
}

impl Quadrotor {
    pub fn new(params: QuadrotorParams) -> Result<Self, ModelError> {
        params.validate()?;
        Ok(Self { params })
    }
}

/// Quadrotor dynamics. Thrust acts along the body −z axis, so positive thrust
/// at level attitude produces negative V̇_z (upward in NED).
pub fn quad_f<S: Scalar>(
    x: &[S],
    u: &[S; 4],
    p: &QuadrotorParams,
    dx: &mut [S],
) -> Result<(), ModelError> {
    let (phi, theta, psi) = (x[6], x[7], x[8]);
    let inv_m = S::from_f64(1.0 / p.mass);
    let (sp, cp) = (phi.sin(), phi.cos());
    let (st, ct) = (theta.sin(), theta.cos());
    let (ss, cs) = (psi.sin(), psi.cos());
    let thrust_acc = u[0] * inv_m;

    // velocity kinematics
    dx[0] = x[3];
    dx[1] = x[4];
    dx[2] = x[5];
    // thrust projection in NED
    dx[3] = -thrust_acc * (sp * ss + cp * cs * st);
    dx[4] = -thrust_acc * (cp * ss * st - cs * sp);
    dx[5] = S::from_f64(p.gravity) - thrust_acc * (cp * ct);
    // Euler-rate transformation
    let rates = euler_rates(phi, theta, &[u[1], u[2], u[3]], p.attitude_margin)?;
    dx[6] = rates[0];
    dx[7] = rates[1];
    dx[8] = rates[2];
    Ok(())
}

impl Plant for Quadrotor {
    fn dim_x(&self) -> usize {
        QUAD_DIM_X
    }

    fn dynamics<S: Scalar>(&self, x: &[S], u: &[S; 4], dx: &mut [S]) -> Result<(), ModelError> {
        quad_f(x, u, &self.params, dx)
    }

    fn output<S: Scalar>(&self, x: &[S]) -> [S; 4] {
        [x[0], x[1], x[2], x[8]]
    }
}
