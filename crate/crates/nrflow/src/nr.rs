//! Newton-Raphson flow tracking controller.
//!
//! The controller holds its own input state u and steers it along
//!
//! ```text
//! u̇ = α · (∂ỹ/∂u)⁻¹ · (r(t+T) − ỹ(t+T))
//! ```
//!
//! so the predicted output flows toward the future reference; α is a speedup
//! factor that scales convergence without changing the flow geometry. The raw
//! rate passes through a per-channel input barrier filter that keeps u inside
//! its box, and is then integrated with explicit Euler at the control rate.
//!
//! Tuning rule of thumb: start with α = 1 and a small horizon T, grow T until
//! the loop stabilizes, then raise α until the tracking error or the input
//! activity budget is met. The `sweep-tuning` command automates the grid.

use crate::math::wrap_diff;
use crate::model::Plant;
use crate::predict::{predict_output_and_jacobian, PredictError, PredictorConfig};
use nalgebra::{Matrix4, SMatrix, SVector, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NrConfig {
    /// Speedup factor α ≥ 1.
    pub alpha: f64,
    pub predictor: PredictorConfig,
    /// Componentwise input box; defaults are unbounded.
    pub u_min: [f64; 4],
    pub u_max: [f64; 4],
    /// Barrier slope γ > 0: each channel obeys −γ(u−u_min) ≤ u̇ ≤ γ(u_max−u).
    pub gamma: f64,
    /// Levenberg damping; 0 means damp only near-singular Jacobians.
    pub lambda: f64,
    /// Smallest-singular-value threshold that triggers damping.
    pub sigma_min: f64,
}

impl Default for NrConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            predictor: PredictorConfig::default(),
            u_min: [f64::NEG_INFINITY; 4],
            u_max: [f64::INFINITY; 4],
            gamma: 10.0,
            lambda: 0.0,
            sigma_min: 1e-6,
        }
    }
}

impl NrConfig {
    pub fn validate(&self) -> Result<(), NrError> {
        if !(self.alpha >= 1.0) {
            return Err(NrError::InvalidConfig("alpha must be at least 1"));
        }
        for i in 0..4 {
            if !(self.u_min[i] < self.u_max[i]) {
                return Err(NrError::InvalidConfig("u_min must be below u_max componentwise"));
            }
        }
        if !(self.gamma > 0.0) {
            return Err(NrError::InvalidConfig("gamma must be positive"));
        }
        if !(self.lambda >= 0.0) {
            return Err(NrError::InvalidConfig("lambda must be nonnegative"));
        }
        if !(self.sigma_min > 0.0) {
            return Err(NrError::InvalidConfig("sigma_min must be positive"));
        }
        self.predictor.validate()?;
        Ok(())
    }
}

/// The controller's dynamic state: the current input command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrState {
    pub u: [f64; 4],
}

impl NrState {
    pub fn new(u: [f64; 4]) -> Self {
        Self { u }
    }
}

#[derive(Debug, Error)]
pub enum NrError {
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error("output Jacobian is singular and undamped")]
    SingularJacobian,
    #[error("invalid controller config: {0}")]
    InvalidConfig(&'static str),
}

/// One controller tick: raw rate, barrier-filtered rate integrated into the
/// new input, and the predicted output for logging.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    /// Command to apply over the next control period.
    pub u: [f64; 4],
    pub state: NrState,
    /// Predicted output ỹ(t+T) at the previous input.
    pub y_tilde: [f64; 4],
    /// True when the rate solve failed and the previous input was held.
    pub singular_hold: bool,
}

/// Solves J·v = rhs with the exact inverse, or the damped normal equations
/// (JᵀJ + λI)⁻¹Jᵀ·rhs when `lambda > 0` or the smallest singular value of J
/// falls below `sigma_min`.
fn damped_solve(
    jac: &Matrix4<f64>,
    rhs: &Vector4<f64>,
    lambda: f64,
    sigma_min: f64,
) -> Result<Vector4<f64>, NrError> {
    let smallest_sv = jac.singular_values().min();
    let damp = if lambda > 0.0 {
        Some(lambda)
    } else if smallest_sv < sigma_min {
        Some(1e-6)
    } else {
        None
    };
    let sol = match damp {
        None => jac.lu().solve(rhs),
        Some(l) => {
            let normal = jac.transpose() * jac + Matrix4::identity() * l;
            normal.cholesky().map(|ch| ch.solve(&(jac.transpose() * rhs)))
        }
    };
    match sol {
        Some(v) if v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(NrError::SingularJacobian),
    }
}

/// Residual r(t+T) − ỹ(t+T) with the yaw channel wrapped to (−π, π].
fn residual(r_future: &[f64; 4], y_tilde: &[f64; 4]) -> Vector4<f64> {
    Vector4::new(
        r_future[0] - y_tilde[0],
        r_future[1] - y_tilde[1],
        r_future[2] - y_tilde[2],
        wrap_diff(r_future[3], y_tilde[3]),
    )
}

fn rate_inner<P: Plant>(
    plant: &P,
    x: &[f64],
    s: &NrState,
    r_future: &[f64; 4],
    cfg: &NrConfig,
) -> Result<([f64; 4], [f64; 4]), NrError> {
    let (y_tilde, jac) = predict_output_and_jacobian(plant, x, &s.u, &cfg.predictor)?;
    let res = residual(r_future, &y_tilde);
    let v = damped_solve(&jac, &res, cfg.lambda, cfg.sigma_min)?;
    Ok(((v * cfg.alpha).into(), y_tilde))
}

/// Raw (unfiltered) input rate α·J̃⁻¹·(r(t+T) − ỹ(t+T)).
pub fn nr_rate<P: Plant>(
    plant: &P,
    x: &[f64],
    s: &NrState,
    r_future: &[f64; 4],
    cfg: &NrConfig,
) -> Result<[f64; 4], NrError> {
    rate_inner(plant, x, s, r_future, cfg).map(|(udot, _)| udot)
}

/// The memoryless law u̇ = α·(dg/du)⁻¹·(r − g(u)) for a static map g, using
/// the exact inverse. This is the textbook form the full controller reduces
/// to when the plant has no state.
pub fn nr_rate_memoryless<const K: usize>(
    g: impl Fn(&SVector<f64, K>) -> SVector<f64, K>,
    dg: impl Fn(&SVector<f64, K>) -> SMatrix<f64, K, K>,
    r: &SVector<f64, K>,
    u: &SVector<f64, K>,
    alpha: f64,
) -> Result<SVector<f64, K>, NrError> {
    let res = r - g(u);
    let j = dg(u);
    // route through dynamic storage: nalgebra's LU needs concrete dimensions
    let jd = nalgebra::DMatrix::from_fn(K, K, |i, p| j[(i, p)]);
    let rd = nalgebra::DVector::from_fn(K, |i, _| res[i]);
    jd.lu()
        .solve(&rd)
        .filter(|v| v.iter().all(|x| x.is_finite()))
        .map(|v| SVector::from_fn(|i, _| v[i] * alpha))
        .ok_or(NrError::SingularJacobian)
}

/// Minimal input-barrier intervention: per channel the returned rate is the
/// value closest to the raw rate inside [−γ(uᵢ−u_minᵢ), γ(u_maxᵢ−uᵢ)]. The
/// two bounds never cross (their gap is γ(u_maxᵢ−u_minᵢ) > 0), and from
/// outside the box both bounds share a sign, forcing motion back inward.
pub fn icbf_filter(s: &NrState, udot_raw: &[f64; 4], cfg: &NrConfig) -> [f64; 4] {
    std::array::from_fn(|i| {
        let hi = cfg.gamma * (cfg.u_max[i] - s.u[i]);
        let lo = -cfg.gamma * (s.u[i] - cfg.u_min[i]);
        udot_raw[i].clamp(lo, hi)
    })
}

/// One explicit-Euler step of the filtered input flow over a control period.
/// A singular rate solve holds the previous input and sets `singular_hold`;
/// prediction failures (e.g. leaving the admissible attitude region)
/// propagate as errors.
pub fn step<P: Plant>(
    plant: &P,
    x: &[f64],
    s: &NrState,
    r_future: &[f64; 4],
    dt_ctrl: f64,
    cfg: &NrConfig,
) -> Result<StepOutcome, NrError> {
    match rate_inner(plant, x, s, r_future, cfg) {
        Ok((udot_raw, y_tilde)) => {
            let udot = icbf_filter(s, &udot_raw, cfg);
            let u: [f64; 4] = std::array::from_fn(|i| s.u[i] + dt_ctrl * udot[i]);
            Ok(StepOutcome { u, state: NrState::new(u), y_tilde, singular_hold: false })
        }
        Err(NrError::SingularJacobian) => Ok(StepOutcome {
            u: s.u,
            state: *s,
            y_tilde: [f64::NAN; 4],
            singular_hold: true,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::analytic::{ChainIntegrator, ZeroDynamics};
    use crate::model::{Quadrotor, QuadrotorParams};
    use crate::predict::predict_output;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix1, Vector1};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chain_cfg(alpha: f64) -> NrConfig {
        NrConfig {
            alpha,
            predictor: PredictorConfig { horizon: 1.0, n_steps: 1, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn identity_jacobian_arithmetic() {
        // chain with T = 1, one step: ỹ = x + u, J = I
        let udot = nr_rate(
            &ChainIntegrator,
            &[0.0; 4],
            &NrState::new([0.0; 4]),
            &[1.0, 1.0, 1.0, 1.0],
            &chain_cfg(2.0),
        )
        .unwrap();
        assert_eq!(udot, [2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn zero_residual_is_a_fixed_point() {
        let r = [0.3, -1.2, 4.0, 0.7];
        let udot = nr_rate(
            &ZeroDynamics,
            &[r[0], r[1], r[2], r[3]],
            &NrState::new([0.0; 4]),
            &r,
            &NrConfig { sigma_min: 0.0_f64.max(1e-12), lambda: 1e-6, ..chain_cfg(7.0) },
        )
        .unwrap();
        assert_eq!(udot, [0.0; 4]);
    }

    #[test]
    fn memoryless_printed_examples() {
        // g = id
        let v = nr_rate_memoryless(
            |u: &Vector1<f64>| *u,
            |_| Matrix1::new(1.0),
            &Vector1::new(1.0),
            &Vector1::new(0.0),
            1.0,
        )
        .unwrap();
        assert_eq!(v[0], 1.0);
        // g = u^3 at its root
        let v = nr_rate_memoryless(
            |u: &Vector1<f64>| Vector1::new(u[0].powi(3)),
            |u| Matrix1::new(3.0 * u[0] * u[0]),
            &Vector1::new(8.0),
            &Vector1::new(2.0),
            5.0,
        )
        .unwrap();
        assert_eq!(v[0], 0.0);
        // g = u^2, direct substitution
        let v = nr_rate_memoryless(
            |u: &Vector1<f64>| Vector1::new(u[0] * u[0]),
            |u| Matrix1::new(2.0 * u[0]),
            &Vector1::new(4.0),
            &Vector1::new(1.0),
            2.0,
        )
        .unwrap();
        assert_eq!(v[0], 3.0);
    }

    #[test]
    fn singular_memoryless_jacobian_errors() {
        let err = nr_rate_memoryless(
            |u: &Vector1<f64>| Vector1::new(u[0] * u[0]),
            |u| Matrix1::new(2.0 * u[0]),
            &Vector1::new(4.0),
            &Vector1::new(0.0),
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, NrError::SingularJacobian));
    }

    #[test]
    fn hover_displacement_rate_agrees_with_perturbation_descent() {
        // ask for +0.1 m north from hover; the rate must pitch the nose down
        // (negative pitch rate in NED) and must be a descent direction for
        // the prediction residual, beating random perturbations
        let quad = Quadrotor::new(QuadrotorParams::default()).unwrap();
        let x = vec![0.0; 9];
        let u0 = [quad.params.hover_thrust(), 0.0, 0.0, 0.0];
        let pred = PredictorConfig { horizon: 0.8, n_steps: 8, ..Default::default() };
        let cfg = NrConfig { alpha: 1.0, predictor: pred, ..Default::default() };
        let y0 = predict_output(&quad, &x, &u0, &pred).unwrap();
        let r = [y0[0] + 0.1, y0[1], y0[2], y0[3]];
        let udot = nr_rate(&quad, &x, &NrState::new(u0), &r, &cfg).unwrap();
        assert!(udot[2] < 0.0, "expected nose-down pitch rate, got {udot:?}");

        let res_norm = |u: &[f64; 4]| -> f64 {
            let y = predict_output(&quad, &x, u, &pred).unwrap();
            (0..4).map(|i| (r[i] - y[i]).powi(2)).sum::<f64>().sqrt()
        };
        let base = res_norm(&u0);
        let eps = 1e-3;
        let norm = udot.iter().map(|v| v * v).sum::<f64>().sqrt();
        let along: [f64; 4] = std::array::from_fn(|i| u0[i] + eps * udot[i] / norm);
        assert!(res_norm(&along) < base, "rate direction must reduce the residual");

        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut best = (base, [0.0; 4]);
        for _ in 0..500 {
            let d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cand: [f64; 4] = std::array::from_fn(|i| u0[i] + eps * d[i] / dn);
            let rn = res_norm(&cand);
            if rn < best.0 {
                best = (rn, d);
            }
        }
        assert!(best.1[2] < 0.0, "best random perturbation should agree on pitch sign");
    }

    #[test]
    fn barrier_filter_examples() {
        let cfg = NrConfig {
            u_min: [-1.0; 4],
            u_max: [1.0; 4],
            gamma: 2.0,
            ..Default::default()
        };
        // strictly interior: untouched
        let s = NrState::new([0.0; 4]);
        let raw = [0.5, -0.5, 1.9, -1.9];
        assert_eq!(icbf_filter(&s, &raw, &cfg), raw);
        // at the upper bound: outward rate clipped to zero
        let s = NrState::new([1.0, 0.0, 0.0, 0.0]);
        let f = icbf_filter(&s, &[5.0, 0.0, 0.0, 0.0], &cfg);
        assert_eq!(f[0], 0.0);
        // outside the box: pushed back in at rate γ·violation
        let delta = 0.25;
        let s = NrState::new([1.0 + delta, 0.0, 0.0, 0.0]);
        let f = icbf_filter(&s, &[0.0; 4], &cfg);
        assert_relative_eq!(f[0], -2.0 * delta, epsilon = 1e-15);
    }

    #[test]
    fn step_integrates_the_filtered_rate() {
        // fixed point: u unchanged
        let r = [0.0; 4];
        let out = step(
            &ZeroDynamics,
            &[0.0; 4],
            &NrState::new([0.0; 4]),
            &r,
            0.01,
            &NrConfig { lambda: 1e-6, ..chain_cfg(3.0) },
        )
        .unwrap();
        assert_eq!(out.u, [0.0; 4]);
        assert!(!out.singular_hold);
        // chain example: one Euler step on u̇ = (2,2,2,2)
        let out = step(
            &ChainIntegrator,
            &[0.0; 4],
            &NrState::new([0.0; 4]),
            &[1.0; 4],
            0.01,
            &chain_cfg(2.0),
        )
        .unwrap();
        assert_eq!(out.u, [0.02; 4]);
        assert_eq!(out.y_tilde, [0.0; 4]);
    }

    #[test]
    fn singular_solve_holds_previous_input() {
        // zero dynamics has J = 0; with damping disabled the solve fails and
        // the step must hold u rather than error out
        let cfg = NrConfig { sigma_min: 0.0, lambda: 0.0, ..chain_cfg(1.0) };
        let s = NrState::new([0.4, -0.2, 0.0, 0.1]);
        let out = step(&ZeroDynamics, &[0.0; 4], &s, &[1.0; 4], 0.01, &cfg).unwrap();
        assert!(out.singular_hold);
        assert_eq!(out.u, s.u);
    }

    #[test]
    fn scalar_closed_loop_meets_speedup_bound() {
        // ẋ = u tracking r = sin t with α = 20: asymptotic |r − y| ≤ 1/α + 0.01
        let alpha = 20.0;
        let t_pred = 0.1;
        let cfg = NrConfig {
            alpha,
            predictor: PredictorConfig { horizon: t_pred, n_steps: 1, ..Default::default() },
            ..Default::default()
        };
        let dt = 1e-3;
        let mut x = [0.0; 4];
        let mut s = NrState::new([0.0; 4]);
        let mut worst: f64 = 0.0;
        let mut t = 0.0;
        while t < 30.0 {
            let r_future = [(t + t_pred).sin(), 0.0, 0.0, 0.0];
            let out = step(&ChainIntegrator, &x, &s, &r_future, dt, &cfg).unwrap();
            s = out.state;
            for i in 0..4 {
                x[i] += dt * s.u[i];
            }
            t += dt;
            if t > 25.0 {
                worst = worst.max((t.sin() - x[0]).abs());
            }
        }
        assert!(worst <= 1.0 / alpha + 0.01, "steady-state error {worst} exceeds bound");
    }

    #[test]
    fn memoryless_lyapunov_decays_at_rate_two_alpha() {
        // g = id, constant r: V = ½‖r−u‖² must follow V₀e^{−2αt}
        let alpha = 1.0;
        let r = Vector4::new(1.0, -2.0, 0.5, 3.0);
        let mut u = Vector4::new(0.0, 1.0, 0.0, -1.0);
        let v0 = 0.5 * (r - u).norm_squared();
        let dt = 1e-4;
        let f = |u: &Vector4<f64>| {
            nr_rate_memoryless(|w: &Vector4<f64>| *w, |_| Matrix4::identity(), &r, u, alpha)
                .unwrap()
        };
        let mut t = 0.0;
        while t < 5.0 {
            let k1 = f(&u);
            let k2 = f(&(u + k1 * (dt / 2.0)));
            let k3 = f(&(u + k2 * (dt / 2.0)));
            let k4 = f(&(u + k3 * dt));
            u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            t += dt;
            let v = 0.5 * (r - u).norm_squared();
            let expect = v0 * (-2.0 * alpha * t).exp();
            assert_relative_eq!(v, expect, max_relative = 1e-3);
        }
    }

    #[test]
    fn memoryless_speedup_bound_across_settings() {
        // g = id, r = sin(ωt): steady-state |r − g(u)| ≤ ω/α + 0.01
        for &alpha in &[1.0, 5.0, 20.0] {
            for &omega in &[0.5, 1.0] {
                let dt = 1e-3;
                let mut u = Vector1::new(0.0);
                let mut worst: f64 = 0.0;
                let mut t: f64 = 0.0;
                while t < 30.0 {
                    let r = Vector1::new((omega * t).sin());
                    let udot = nr_rate_memoryless(
                        |w: &Vector1<f64>| *w,
                        |_| Matrix1::new(1.0),
                        &r,
                        &u,
                        alpha,
                    )
                    .unwrap();
                    u += udot * dt;
                    t += dt;
                    if t > 20.0 {
                        worst = worst.max(((omega * t).sin() - u[0]).abs());
                    }
                }
                assert!(
                    worst <= omega / alpha + 0.01,
                    "alpha={alpha} omega={omega}: error {worst} exceeds bound"
                );
            }
        }
    }

    #[test]
    fn damped_and_exact_inverse_agree_when_well_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..100 {
            let jac = Matrix4::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            if jac.singular_values().min() < 1e-3 {
                continue;
            }
            let rhs = Vector4::from_fn(|i, _| (i as f64) - 1.5);
            let exact = damped_solve(&jac, &rhs, 0.0, 1e-6).unwrap();
            let forced = damped_solve(&jac, &rhs, 1e-14, 1e-6).unwrap();
            for i in 0..4 {
                assert_relative_eq!(exact[i], forced[i], max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn overshoot_bounded_when_step_exceeds_barrier_budget() {
        // dt·γ = 1.5 > 1: a saturating rate may overshoot the box, but never
        // by more than (dt·γ − 1)·(u_max − u_min) in one step
        let cfg = NrConfig {
            u_min: [0.0; 4],
            u_max: [1.0; 4],
            gamma: 15.0,
            ..Default::default()
        };
        let dt = 0.1;
        let s = NrState::new([0.2; 4]);
        let filtered = icbf_filter(&s, &[1e6; 4], &cfg);
        let u_next = s.u[0] + dt * filtered[0];
        let bound = 1.0 + (dt * cfg.gamma - 1.0) * 1.0;
        assert!(u_next <= bound + 1e-12, "{u_next} > {bound}");
        assert!(u_next > 1.0, "this setting is expected to overshoot");
    }

    proptest! {
        #[test]
        fn box_invariant_under_arbitrary_rates(
            u0 in proptest::array::uniform4(-1.0f64..1.0),
            raws in proptest::collection::vec(proptest::array::uniform4(-100.0f64..100.0), 1..60),
            gamma in 0.1f64..100.0,
        ) {
            // dt·γ ≤ 1 here, so the box is forward invariant exactly
            let dt = 0.01;
            let cfg = NrConfig { u_min: [-1.0; 4], u_max: [1.0; 4], gamma, ..Default::default() };
            let mut s = NrState::new(u0);
            for raw in &raws {
                let f = icbf_filter(&s, raw, &cfg);
                s = NrState::new(std::array::from_fn(|i| s.u[i] + dt * f[i]));
                for i in 0..4 {
                    prop_assert!(s.u[i] <= 1.0 + 1e-12 && s.u[i] >= -1.0 - 1e-12);
                }
            }
        }

        #[test]
        fn distance_to_box_contracts_from_outside(
            excess in 0.01f64..2.0,
            raws in proptest::collection::vec(proptest::array::uniform4(-50.0f64..50.0), 1..40),
        ) {
            let dt = 0.01;
            let cfg = NrConfig { u_min: [-1.0; 4], u_max: [1.0; 4], gamma: 10.0, ..Default::default() };
            let dist = |u: &[f64; 4]| -> f64 {
                u.iter().map(|v| (v - 1.0).max(-1.0 - v).max(0.0)).fold(0.0, f64::max)
            };
            let mut s = NrState::new([1.0 + excess, -1.0 - excess, 0.0, 0.0]);
            let mut d = dist(&s.u);
            for raw in &raws {
                let f = icbf_filter(&s, raw, &cfg);
                s = NrState::new(std::array::from_fn(|i| s.u[i] + dt * f[i]));
                let d_next = dist(&s.u);
                prop_assert!(d_next <= d * (1.0 - dt * cfg.gamma) + 1e-12);
                d = d_next;
            }
        }

        #[test]
        fn filtered_rate_feasible_and_minimal(
            u in proptest::array::uniform4(-2.0f64..2.0),
            raw in proptest::array::uniform4(-30.0f64..30.0),
            gamma in 0.1f64..20.0,
        ) {
            let cfg = NrConfig { u_min: [-1.0; 4], u_max: [1.0; 4], gamma, ..Default::default() };
            let s = NrState::new(u);
            let f = icbf_filter(&s, &raw, &cfg);
            for i in 0..4 {
                let hi = gamma * (1.0 - u[i]);
                let lo = -gamma * (u[i] + 1.0);
                prop_assert!(f[i] <= hi + 1e-12 && f[i] >= lo - 1e-12);
                if raw[i] <= hi && raw[i] >= lo {
                    prop_assert_eq!(f[i], raw[i]);
                } else {
                    // clipped to the nearest feasible boundary
                    let nearest = raw[i].clamp(lo, hi);
                    prop_assert!((f[i] - nearest).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(NrConfig::default().validate().is_ok());
        assert!(NrConfig { alpha: 0.5, ..Default::default() }.validate().is_err());
        assert!(NrConfig { gamma: 0.0, ..Default::default() }.validate().is_err());
        assert!(
            NrConfig { u_min: [1.0; 4], u_max: [1.0; 4], ..Default::default() }
                .validate()
                .is_err()
        );
        assert!(NrConfig { sigma_min: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn yaw_residual_wraps_across_the_seam() {
        // prediction just below +π, reference just past −π: the wrapped
        // residual is +0.1, so the yaw rate must not spin the long way round
        let x = [0.0, 0.0, 0.0, std::f64::consts::PI - 0.05];
        let r = [0.0, 0.0, 0.0, -std::f64::consts::PI + 0.05];
        let udot = nr_rate(
            &ChainIntegrator,
            &x,
            &NrState::new([0.0; 4]),
            &r,
            &chain_cfg(1.0),
        )
        .unwrap();
        assert_relative_eq!(udot[3], 0.1, epsilon = 1e-12);
    }
}
