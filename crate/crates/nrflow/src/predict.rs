//! Frozen-input output prediction and its input Jacobian.
//!
//! The tracking controller steers the *predicted* output ỹ(t+T) = h(ξ(t+T)),
//! where ξ flows under the plant dynamics for a horizon T with the input held
//! at its current value. Prediction uses forward Euler with a configurable
//! substep count; the 4×4 Jacobian ∂ỹ/∂u comes either from forward-mode
//! dual-number differentiation of the discretized integrator (exact to
//! machine precision) or from central finite differences.

use crate::math::{Dual, Scalar};
use crate::model::{ModelError, Plant};
use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    /// Differentiate the discretized flow with a 4-wide dual tangent.
    DualNumber,
    /// Central differences with step `fd_step · max(1, |u_j|)` per channel.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorConfig {
    /// Prediction horizon T [s].
    pub horizon: f64,
    /// Forward-Euler substeps across the horizon.
    pub n_steps: usize,
    pub jacobian_mode: JacobianMode,
    /// Base step for finite-difference mode.
    pub fd_step: f64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            n_steps: 8,
            jacobian_mode: JacobianMode::DualNumber,
            fd_step: 1e-6,
        }
    }
}

impl PredictorConfig {
    pub fn validate(&self) -> Result<(), PredictError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(PredictError::InvalidConfig("horizon must be positive and finite"));
        }
        if self.n_steps == 0 {
            return Err(PredictError::InvalidConfig("n_steps must be at least 1"));
        }
        if self.jacobian_mode == JacobianMode::FiniteDifference && !(self.fd_step > 0.0) {
            return Err(PredictError::InvalidConfig(
                "fd_step must be positive in finite-difference mode",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("predicted-output Jacobian has a non-finite entry")]
    NonFiniteJacobian,
    #[error("invalid predictor config: {0}")]
    InvalidConfig(&'static str),
}

/// Forward-Euler flow of the plant over `horizon` with the input frozen.
/// Generic over the scalar so the same code path carries dual tangents.
pub fn euler_flow<P: Plant, S: Scalar>(
    plant: &P,
    x: &[S],
    u: &[S; 4],
    horizon: f64,
    n_steps: usize,
) -> Result<Vec<S>, ModelError> {
    let h = S::from_f64(horizon / n_steps as f64);
    let mut xi = x.to_vec();
    let mut dx = vec![S::from_f64(0.0); x.len()];
    for _ in 0..n_steps {
        plant.dynamics(&xi, u, &mut dx)?;
        for (a, d) in xi.iter_mut().zip(&dx) {
            *a += *d * h;
        }
    }
    Ok(xi)
}

/// State after the frozen-input prediction: pure in (x, u, cfg).
pub fn predict_state<P: Plant>(
    plant: &P,
    x: &[f64],
    u: &[f64; 4],
    cfg: &PredictorConfig,
) -> Result<Vec<f64>, PredictError> {
    cfg.validate()?;
    plant.check_dim(x)?;
    Ok(euler_flow(plant, x, u, cfg.horizon, cfg.n_steps)?)
}

/// Predicted output ỹ(t+T) = h(ξ(t+T)).
pub fn predict_output<P: Plant>(
    plant: &P,
    x: &[f64],
    u: &[f64; 4],
    cfg: &PredictorConfig,
) -> Result<[f64; 4], PredictError> {
    Ok(plant.output(&predict_state(plant, x, u, cfg)?))
}

/// Predicted output together with its Jacobian with respect to the current
/// input. In dual-number mode both come from one differentiated sweep.
pub fn predict_output_and_jacobian<P: Plant>(
    plant: &P,
    x: &[f64],
    u: &[f64; 4],
    cfg: &PredictorConfig,
) -> Result<([f64; 4], Matrix4<f64>), PredictError> {
    cfg.validate()?;
    plant.check_dim(x)?;
    match cfg.jacobian_mode {
        JacobianMode::DualNumber => {
            let xd: Vec<Dual<4>> = x.iter().map(|&v| Dual::constant(v)).collect();
            let ud: [Dual<4>; 4] = std::array::from_fn(|j| Dual::variable(u[j], j));
            let xi = euler_flow(plant, &xd, &ud, cfg.horizon, cfg.n_steps)?;
            let out = plant.output(&xi);
            let y = out.map(|o| o.re);
            let jac = Matrix4::from_fn(|i, j| out[i].eps[j]);
            ensure_finite(&jac)?;
            Ok((y, jac))
        }
        JacobianMode::FiniteDifference => {
            let y = plant.output(&euler_flow(plant, x, u, cfg.horizon, cfg.n_steps)?);
            let mut jac = Matrix4::zeros();
            for j in 0..4 {
                let h = cfg.fd_step * u[j].abs().max(1.0);
                let mut up = *u;
                up[j] += h;
                let mut um = *u;
                um[j] -= h;
                let yp = plant.output(&euler_flow(plant, x, &up, cfg.horizon, cfg.n_steps)?);
                let ym = plant.output(&euler_flow(plant, x, &um, cfg.horizon, cfg.n_steps)?);
                for i in 0..4 {
                    jac[(i, j)] = (yp[i] - ym[i]) / (2.0 * h);
                }
            }
            ensure_finite(&jac)?;
            Ok((y, jac))
        }
    }
}

/// Jacobian J[i][j] = ∂ỹ_i/∂u_j of the predicted output.
pub fn output_jacobian<P: Plant>(
    plant: &P,
    x: &[f64],
    u: &[f64; 4],
    cfg: &PredictorConfig,
) -> Result<Matrix4<f64>, PredictError> {
    predict_output_and_jacobian(plant, x, u, cfg).map(|(_, j)| j)
}

fn ensure_finite(jac: &Matrix4<f64>) -> Result<(), PredictError> {
    if jac.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(PredictError::NonFiniteJacobian)
    }
}
