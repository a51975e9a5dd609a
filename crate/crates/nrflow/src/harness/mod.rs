//! Closed-loop episode execution and tracking metrics.
//!
//! An episode drives one plant with one controller along one reference at a
//! fixed control rate. The truth model integrates with RK4 at a finer substep
//! under zero-order-hold input, while the controller sees an optionally
//! noised state measurement once per tick. Per-tick records capture the
//! applied input, the current reference, the controller's predicted output
//! when it has one, the synthesis time from a monotonic clock wrapped around
//! the controller call alone, and event flags.
//!
//! Divergence is data, not an error: when the state leaves the safety bound
//! or the truth integration fails, the episode stops with a crash flag and
//! the log up to that tick survives, so summaries can render "-" for the
//! combinations that did not finish.

mod controllers;
pub mod io;

pub use controllers::{ControllerError, FblTracker, NmpcTracker, NrTracker, TickOutput, TrackingController};

use crate::math::wrap_diff;
use crate::model::Plant;
use crate::traj::{TrajectorySpec, TrajError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Controller tick rate [Hz].
    pub control_rate: f64,
    /// RK4 truth substeps per control period.
    pub sim_substeps: usize,
    /// Wall-clock synthesis budget per tick [s].
    pub deadline_budget: f64,
    /// Optional measurement noise std per state channel; empty disables.
    pub noise_std: Vec<f64>,
    pub seed: u64,
    /// Crash threshold on ‖x‖∞.
    pub safety_bound: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            control_rate: 100.0,
            sim_substeps: 10,
            deadline_budget: 0.010,
            noise_std: Vec::new(),
            seed: 0,
            safety_bound: 100.0,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self, dim_x: usize) -> Result<(), HarnessError> {
        if !(self.control_rate > 0.0) {
            return Err(HarnessError::InvalidConfig("control_rate must be positive"));
        }
        if self.sim_substeps == 0 {
            return Err(HarnessError::InvalidConfig("sim_substeps must be at least 1"));
        }
        if !(self.deadline_budget > 0.0) {
            return Err(HarnessError::InvalidConfig("deadline_budget must be positive"));
        }
        if !(self.safety_bound > 0.0) {
            return Err(HarnessError::InvalidConfig("safety_bound must be positive"));
        }
        if !self.noise_std.is_empty() {
            if self.noise_std.len() != dim_x {
                return Err(HarnessError::InvalidConfig(
                    "noise_std length must match the plant state dimension",
                ));
            }
            if self.noise_std.iter().any(|s| !(*s >= 0.0)) {
                return Err(HarnessError::InvalidConfig("noise_std entries must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn dt_ctrl(&self) -> f64 {
        1.0 / self.control_rate
    }
}

/// Per-tick event flags. A tick counts as a deadline miss when the measured
/// wall time exceeds the budget *or* the solver had to stop at its iteration
/// cap before converging — the latter keeps deadline phenomenology
/// machine-independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TickFlags {
    /// Controller could not synthesize a fresh command and held the last one.
    pub singular_jacobian: bool,
    /// Solver line search failed at its first iterate.
    pub no_descent: bool,
    pub deadline_miss: bool,
    /// Iteration cap reached without convergence.
    pub budget_exhausted: bool,
    /// Episode diverged at this tick.
    pub crash: bool,
}

impl TickFlags {
    pub fn render(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if self.singular_jacobian {
            parts.push("singular-jacobian");
        }
        if self.no_descent {
            parts.push("no-descent");
        }
        if self.deadline_miss {
            parts.push("deadline-miss");
        }
        if self.budget_exhausted {
            parts.push("budget-exhausted");
        }
        if self.crash {
            parts.push("crash");
        }
        parts.join(";")
    }

    pub fn parse(text: &str) -> Self {
        let mut flags = Self::default();
        for tok in text.split(';').filter(|t| !t.is_empty()) {
            match tok {
                "singular-jacobian" => flags.singular_jacobian = true,
                "no-descent" => flags.no_descent = true,
                "deadline-miss" => flags.deadline_miss = true,
                "budget-exhausted" => flags.budget_exhausted = true,
                "crash" => flags.crash = true,
                _ => {}
            }
        }
        flags
    }
}

#[derive(Debug, Clone)]
pub struct TickRecord {
    pub t: f64,
    /// Truth state at the start of the tick.
    pub x: Vec<f64>,
    /// Input applied over the period.
    pub u: [f64; 4],
    /// Reference at the tick time.
    pub r: [f64; 4],
    /// Controller's predicted output; NaN for controllers without one.
    pub y_tilde: [f64; 4],
    pub compute_ns: u64,
    pub flags: TickFlags,
}

#[derive(Debug, Clone)]
pub struct EpisodeLog {
    pub platform: String,
    pub controller: String,
    pub trajectory: TrajectorySpec,
    pub episode: EpisodeConfig,
    pub dim_x: usize,
    pub ticks: Vec<TickRecord>,
    pub crashed: bool,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid episode config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Trajectory(#[from] TrajError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("log has no ticks")]
    EmptyLog,
    #[error("clip window contains no ticks")]
    EmptyWindow,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimingStats {
    pub mean_ms: f64,
    pub std_ms: f64,
    pub max_ms: f64,
    pub miss_fraction: f64,
}

/// Runs one closed-loop episode. Controller failures on a tick hold the
/// previous input and set the singular-jacobian flag; state divergence stops
/// the episode with a crash flag. Deterministic given the seed, apart from
/// the measured compute times.
pub fn run_episode<P: Plant, C: TrackingController<P>>(
    plant: &P,
    controller: &mut C,
    traj: &TrajectorySpec,
    cfg: &EpisodeConfig,
) -> Result<EpisodeLog, HarnessError> {
    cfg.validate(plant.dim_x())?;
    traj.validate()?;
    let dt_ctrl = cfg.dt_ctrl();
    let n_ticks = (traj.total_time * cfg.control_rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise: Option<Vec<Normal<f64>>> = if cfg.noise_std.is_empty() {
        None
    } else {
        Some(
            cfg.noise_std
                .iter()
                .map(|&s| Normal::new(0.0, s.max(0.0)).expect("validated std"))
                .collect(),
        )
    };

    let mut x = controller.initial_state(plant);
    let mut u_prev = controller.initial_input();
    let mut ticks = Vec::with_capacity(n_ticks);
    let mut crashed = false;

    for k in 0..n_ticks {
        let t = k as f64 * dt_ctrl;
        let x_meas: Vec<f64> = match &noise {
            None => x.clone(),
            Some(dists) => x
                .iter()
                .zip(dists)
                .map(|(v, d)| v + d.sample(&mut rng))
                .collect(),
        };

        let started = Instant::now();
        let outcome = controller.tick(plant, &x_meas, t, traj, dt_ctrl);
        let compute_ns = started.elapsed().as_nanos() as u64;

        let (u, y_tilde, mut flags) = match outcome {
            Ok(out) => (out.u, out.y_tilde.unwrap_or([f64::NAN; 4]), out.flags),
            Err(_) => (
                u_prev,
                [f64::NAN; 4],
                TickFlags { singular_jacobian: true, ..Default::default() },
            ),
        };
        if compute_ns as f64 / 1e9 > cfg.deadline_budget || flags.budget_exhausted {
            flags.deadline_miss = true;
        }
        let r = traj.sample(t)?.r;

        // truth integration: RK4 substeps under zero-order hold
        let mut diverged = false;
        let h = dt_ctrl / cfg.sim_substeps as f64;
        for _ in 0..cfg.sim_substeps {
            if rk4_step(plant, &mut x, &u, h).is_err() {
                diverged = true;
                break;
            }
        }
        if !diverged {
            diverged = x.iter().any(|v| !v.is_finite() || v.abs() > cfg.safety_bound);
        }
        if diverged {
            flags.crash = true;
        }
        ticks.push(TickRecord {
            t,
            x: x_meas,
            u,
            r,
            y_tilde,
            compute_ns,
            flags,
        });
        u_prev = u;
        if diverged {
            crashed = true;
            break;
        }
    }

    Ok(EpisodeLog {
        platform: plant.name().to_string(),
        controller: controller.label().to_string(),
        trajectory: *traj,
        episode: cfg.clone(),
        dim_x: plant.dim_x(),
        ticks,
        crashed,
    })
}

fn rk4_step<P: Plant>(
    plant: &P,
    x: &mut Vec<f64>,
    u: &[f64; 4],
    h: f64,
) -> Result<(), crate::model::ModelError> {
    let n = x.len();
    let eval = |state: &[f64]| -> Result<Vec<f64>, crate::model::ModelError> {
        let mut dx = vec![0.0; n];
        plant.dynamics(state, u, &mut dx)?;
        Ok(dx)
    };
    let k1 = eval(x)?;
    let mid1: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k1[i]).collect();
    let k2 = eval(&mid1)?;
    let mid2: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k2[i]).collect();
    let k3 = eval(&mid2)?;
    let end: Vec<f64> = (0..n).map(|i| x[i] + h * k3[i]).collect();
    let k4 = eval(&end)?;
    for i in 0..n {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

impl EpisodeLog {
    fn included_ticks(&self, clip: bool) -> Result<Vec<&TickRecord>, MetricsError> {
        if self.ticks.is_empty() {
            return Err(MetricsError::EmptyLog);
        }
        let (t0, t1) = self.trajectory.active_window();
        let picked: Vec<&TickRecord> = self
            .ticks
            .iter()
            .filter(|tick| !clip || (tick.t >= t0 && tick.t < t1))
            .collect();
        if picked.is_empty() {
            return Err(MetricsError::EmptyWindow);
        }
        Ok(picked)
    }

    /// Root-mean-square Euclidean position error [m]; `clip` restricts to
    /// the active window.
    pub fn rmse(&self, clip: bool) -> Result<f64, MetricsError> {
        let picked = self.included_ticks(clip)?;
        let sum: f64 = picked
            .iter()
            .map(|tick| {
                (0..3)
                    .map(|i| (tick.x_output(i) - tick.r[i]).powi(2))
                    .sum::<f64>()
            })
            .sum();
        Ok((sum / picked.len() as f64).sqrt())
    }

    /// Root-mean-square wrapped yaw error [rad].
    pub fn rmse_yaw(&self, clip: bool) -> Result<f64, MetricsError> {
        let picked = self.included_ticks(clip)?;
        let sum: f64 = picked
            .iter()
            .map(|tick| wrap_diff(tick.yaw_output(), tick.r[3]).powi(2))
            .sum();
        Ok((sum / picked.len() as f64).sqrt())
    }

    /// Compute-time statistics in milliseconds plus the deadline-miss share.
    pub fn timing_stats(&self) -> Result<TimingStats, MetricsError> {
        if self.ticks.is_empty() {
            return Err(MetricsError::EmptyLog);
        }
        let ms: Vec<f64> = self.ticks.iter().map(|t| t.compute_ns as f64 / 1e6).collect();
        let n = ms.len() as f64;
        let mean = ms.iter().sum::<f64>() / n;
        let var = if ms.len() > 1 {
            ms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let max = ms.iter().fold(0.0f64, |a, &b| a.max(b));
        let misses = self.ticks.iter().filter(|t| t.flags.deadline_miss).count();
        Ok(TimingStats {
            mean_ms: mean,
            std_ms: var.sqrt(),
            max_ms: max,
            miss_fraction: misses as f64 / n,
        })
    }

    pub fn flag_counts(&self) -> (usize, usize, usize, usize) {
        let mut s = (0, 0, 0, 0);
        for t in &self.ticks {
            s.0 += t.flags.singular_jacobian as usize;
            s.1 += t.flags.no_descent as usize;
            s.2 += t.flags.deadline_miss as usize;
            s.3 += t.flags.budget_exhausted as usize;
        }
        s
    }
}

impl TickRecord {
    /// Position output channel i from the logged state. The output layout is
    /// (x, y, z, ψ) for both plants but sits at different state offsets.
    fn x_output(&self, i: usize) -> f64 {
        match self.x.len() {
            9 => self.x[i],
            12 => self.x[6 + i],
            _ => self.x[i],
        }
    }

    fn yaw_output(&self) -> f64 {
        match self.x.len() {
            9 => self.x[8],
            12 => self.x[11],
            _ => self.x[3.min(self.x.len() - 1)],
        }
    }
}
