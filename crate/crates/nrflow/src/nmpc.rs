//! Receding-horizon tracking baseline: single-shooting Gauss-Newton SQP.
//!
//! Minimizes the discretized tracking-plus-effort cost
//!
//! ```text
//! Σ_{j=1..N} e_jᵀQe_j + Σ_{j=0..N-1} u_jᵀRu_j
//! s.t. x_{j+1} = x_j + Δt·f(x_j, u_j),   u_j ∈ [u_min, u_max]
//! ```
//!
//! with e_j = h(x_j) − ref_j (yaw wrapped). Each iteration rolls the plan
//! out, propagates dense input sensitivities with dual-number step
//! linearizations, solves the Gauss-Newton normal equations, projects the
//! trial plan onto the input box, and backtracks until the true cost
//! decreases. Accepted iterates never increase the cost; a first-iterate
//! line-search failure is reported as data (`no_descent`), not an error, and
//! hands back the warm-start input.

use crate::math::{wrap_diff, Dual, Scalar};
use crate::model::{ModelError, Plant};
use nalgebra::{DMatrix, DVector, Matrix4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest supported state dimension for the sensitivity duals.
const MAX_DIM: usize = 12;
const MAX_HALVINGS: u32 = 12;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmpcConfig {
    /// Horizon steps.
    pub n: usize,
    /// Discretization step [s]; the lookahead is n·dt.
    pub dt: f64,
    /// Diagonal of the tracking cost Q.
    pub q_diag: [f64; 4],
    /// Diagonal of the effort cost R (positive).
    pub r_diag: [f64; 4],
    pub u_min: [f64; 4],
    pub u_max: [f64; 4],
    /// Gauss-Newton iteration cap; doubles as the deadline budget knob.
    pub max_iters: usize,
    /// Stop when the relative cost decrease falls below this.
    pub cost_tol: f64,
    /// Seed each solve from the shifted previous plan.
    pub warm_start: bool,
}

impl Default for NmpcConfig {
    fn default() -> Self {
        Self {
            n: 20,
            dt: 0.05,
            q_diag: [10.0, 10.0, 10.0, 2.0],
            r_diag: [1e-4; 4],
            u_min: [f64::NEG_INFINITY; 4],
            u_max: [f64::INFINITY; 4],
            max_iters: 8,
            cost_tol: 1e-6,
            warm_start: true,
        }
    }
}

impl NmpcConfig {
    pub fn validate(&self) -> Result<(), NmpcError> {
        if self.n == 0 {
            return Err(NmpcError::InvalidConfig("horizon must have at least one step"));
        }
        if !(self.dt > 0.0) {
            return Err(NmpcError::InvalidConfig("dt must be positive"));
        }
        if self.q_diag.iter().any(|q| !(*q >= 0.0)) {
            return Err(NmpcError::InvalidConfig("q_diag entries must be nonnegative"));
        }
        if self.r_diag.iter().any(|r| !(*r > 0.0)) {
            return Err(NmpcError::InvalidConfig("r_diag entries must be positive"));
        }
        for i in 0..4 {
            if !(self.u_min[i] < self.u_max[i]) {
                return Err(NmpcError::InvalidConfig("u_min must be below u_max componentwise"));
            }
        }
        if !(self.cost_tol >= 0.0) {
            return Err(NmpcError::InvalidConfig("cost_tol must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NmpcError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid NMPC config: {0}")]
    InvalidConfig(&'static str),
    #[error("initial rollout failed or has non-finite cost")]
    InfeasibleStart,
    #[error("reference window has {got} entries, horizon needs {expected}")]
    BadWindow { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct NmpcSolution {
    /// First input of the plan — the command to apply.
    pub u0: [f64; 4],
    pub plan: Vec<[f64; 4]>,
    /// Accepted Gauss-Newton iterations.
    pub iters: usize,
    pub cost: f64,
    /// True when the relative-decrease test stopped the solve before the
    /// iteration cap.
    pub converged: bool,
    /// True when the very first line search found no acceptable step; u0 is
    /// then the warm-start input.
    pub no_descent: bool,
    /// Cost after the initial rollout and after each accepted iterate.
    pub cost_trace: Vec<f64>,
}

fn project(plan: &mut [[f64; 4]], cfg: &NmpcConfig) {
    for u in plan.iter_mut() {
        for i in 0..4 {
            u[i] = u[i].clamp(cfg.u_min[i], cfg.u_max[i]);
        }
    }
}

fn wrapped_error(y: &[f64; 4], r: &[f64; 4]) -> [f64; 4] {
    [y[0] - r[0], y[1] - r[1], y[2] - r[2], wrap_diff(y[3], r[3])]
}

/// Cost of rolling `plan` out from `x0`; model errors and non-finite states
/// surface as Err so the line search can reject the candidate.
fn rollout_cost<P: Plant>(
    plant: &P,
    x0: &[f64],
    plan: &[[f64; 4]],
    refs: &[[f64; 4]],
    cfg: &NmpcConfig,
) -> Result<f64, ModelError> {
    let n_x = plant.dim_x();
    let mut x = x0.to_vec();
    let mut dx = vec![0.0; n_x];
    let mut cost = 0.0;
    for (j, u) in plan.iter().enumerate() {
        plant.dynamics(&x, u, &mut dx)?;
        for i in 0..n_x {
            x[i] += cfg.dt * dx[i];
        }
        let e = wrapped_error(&plant.output(&x), &refs[j]);
        for i in 0..4 {
            cost += cfg.q_diag[i] * e[i] * e[i] + cfg.r_diag[i] * u[i] * u[i];
        }
    }
    if cost.is_finite() {
        Ok(cost)
    } else {
        Err(ModelError::InvalidParams("rollout diverged to non-finite cost".into()))
    }
}

/// One-step linearization at (x, u): A = I + dt·∂f/∂x, B = dt·∂f/∂u, and the
/// output rows C = ∂h/∂x at the *successor* state are handled by the caller.
fn step_jacobians<P: Plant>(
    plant: &P,
    x: &[f64],
    u: &[f64; 4],
    dt: f64,
    a: &mut DMatrix<f64>,
    b: &mut DMatrix<f64>,
) -> Result<(), ModelError> {
    let n_x = plant.dim_x();
    let xd: Vec<Dual<MAX_DIM>> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| Dual::variable(v, i))
        .collect();
    let ud_const: [Dual<MAX_DIM>; 4] = std::array::from_fn(|i| Dual::constant(u[i]));
    let mut dxd = vec![Dual::<MAX_DIM>::constant(0.0); n_x];
    plant.dynamics(&xd, &ud_const, &mut dxd)?;
    for i in 0..n_x {
        for j in 0..n_x {
            a[(i, j)] = dt * dxd[i].eps[j] + if i == j { 1.0 } else { 0.0 };
        }
    }
    let xc: Vec<Dual<4>> = x.iter().map(|&v| Dual::constant(v)).collect();
    let ud: [Dual<4>; 4] = std::array::from_fn(|i| Dual::variable(u[i], i));
    let mut dxu = vec![Dual::<4>::constant(0.0); n_x];
    plant.dynamics(&xc, &ud, &mut dxu)?;
    for i in 0..n_x {
        for j in 0..4 {
            b[(i, j)] = dt * dxu[i].eps[j];
        }
    }
    Ok(())
}

/// Output Jacobian ∂h/∂x at x (4×n).
fn output_rows<P: Plant>(plant: &P, x: &[f64], c: &mut DMatrix<f64>) {
    let xd: Vec<Dual<MAX_DIM>> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| Dual::variable(v, i))
        .collect();
    let y = plant.output(&xd);
    for i in 0..4 {
        for j in 0..x.len() {
            c[(i, j)] = y[i].eps[j];
        }
    }
}

/// Solves the horizon problem from `x0` toward `ref_window` (targets for the
/// states after steps 1..=N). `warm` seeds the plan; `None` starts from
/// zeros. With `max_iters = 0` the (projected) seed is returned untouched,
/// which makes warm-started re-solves reproducible.
pub fn nmpc_solve<P: Plant>(
    plant: &P,
    x0: &[f64],
    ref_window: &[[f64; 4]],
    cfg: &NmpcConfig,
    warm: Option<&[[f64; 4]]>,
) -> Result<NmpcSolution, NmpcError> {
    cfg.validate()?;
    plant.check_dim(x0)?;
    let n = cfg.n;
    let n_x = plant.dim_x();
    assert!(n_x <= MAX_DIM, "plant state dimension exceeds sensitivity width");
    if ref_window.len() != n {
        return Err(NmpcError::BadWindow { expected: n, got: ref_window.len() });
    }

    let mut plan: Vec<[f64; 4]> = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        _ => vec![[0.0; 4]; n],
    };
    project(&mut plan, cfg);

    let mut cost = rollout_cost(plant, x0, &plan, ref_window, cfg)
        .map_err(|_| NmpcError::InfeasibleStart)?;
    let mut cost_trace = vec![cost];
    let mut iters = 0;
    let mut converged = false;
    let mut no_descent = false;

    // reusable workspace
    let mut a = DMatrix::zeros(n_x, n_x);
    let mut b = DMatrix::zeros(n_x, 4);
    let mut c = DMatrix::zeros(4, n_x);
    let q = Matrix4::from_diagonal(&nalgebra::Vector4::from(cfg.q_diag));

    while iters < cfg.max_iters {
        // rollout with sensitivities S_j = ∂x_j/∂plan (n_x × 4N)
        let mut x = x0.to_vec();
        let mut dx = vec![0.0; n_x];
        let mut s = DMatrix::<f64>::zeros(n_x, 4 * n);
        let mut h = DMatrix::<f64>::zeros(4 * n, 4 * n);
        let mut g = DVector::<f64>::zeros(4 * n);
        for j in 0..n {
            step_jacobians(plant, &x, &plan[j], cfg.dt, &mut a, &mut b)
                .map_err(NmpcError::Model)?;
            plant.dynamics(&x, &plan[j], &mut dx).map_err(NmpcError::Model)?;
            for i in 0..n_x {
                x[i] += cfg.dt * dx[i];
            }
            s = &a * s;
            for r_i in 0..n_x {
                for c_i in 0..4 {
                    s[(r_i, 4 * j + c_i)] += b[(r_i, c_i)];
                }
            }
            output_rows(plant, &x, &mut c);
            let gj = &c * &s; // 4 × 4N output sensitivity
            let e = wrapped_error(&plant.output(&x), &ref_window[j]);
            let qe = q * nalgebra::Vector4::from(e);
            h.gemm_tr(1.0, &gj, &(q * &gj), 1.0);
            g.gemv_tr(1.0, &gj, &qe, 1.0);
        }
        for j in 0..n {
            for i in 0..4 {
                let k = 4 * j + i;
                h[(k, k)] += cfg.r_diag[i];
                g[k] += cfg.r_diag[i] * plan[j][i];
            }
        }

        let delta = match h.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => break, // numerically indefinite: keep the current plan
        };

        // backtracking line search with box projection
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = plan.clone();
            for j in 0..n {
                for i in 0..4 {
                    trial[j][i] += scale * delta[4 * j + i];
                }
            }
            project(&mut trial, cfg);
            if let Ok(trial_cost) = rollout_cost(plant, x0, &trial, ref_window, cfg) {
                if trial_cost <= cost {
                    let rel_drop = (cost - trial_cost) / cost.max(1e-12);
                    plan = trial;
                    cost = trial_cost;
                    cost_trace.push(cost);
                    iters += 1;
                    accepted = true;
                    if rel_drop < cfg.cost_tol {
                        converged = true;
                    }
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            if iters == 0 {
                no_descent = true;
            }
            break;
        }
        if converged {
            break;
        }
    }

    Ok(NmpcSolution {
        u0: plan[0],
        plan,
        iters,
        cost,
        converged,
        no_descent,
        cost_trace,
    })
}
