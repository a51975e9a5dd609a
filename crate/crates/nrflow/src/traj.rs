//! Reference trajectory suite with analytic first and second derivatives.
//!
//! Every reference is a three-phase profile: hover at the center while the
//! vehicle settles, an active window with the named geometry, and a constant
//! return target (hover again) at the end. The hover→active and
//! active→return hand-offs are deliberate step discontinuities in r; tracking
//! metrics clip to the active window to measure steady behavior.
//!
//! Geometry conventions (τ = time since the active window opened,
//! ω = 2π/period, R = radius, A = z_amplitude, all offsets from `center`):
//!
//! | kind         | profile                                              |
//! |--------------|------------------------------------------------------|
//! | circle-a/c   | (R·cos ωτ, R·sin ωτ, 0) — horizontal circle          |
//! | circle-b     | (R·cos ωτ, 0, R·sin ωτ) — vertical circle            |
//! | lemniscate-a | (R·sin ωτ, ½R·sin 2ωτ, 0) — horizontal figure eight  |
//! | lemniscate-b | (R·sin ωτ, 0, ½R·sin 2ωτ) — vertical figure eight    |
//! | lemniscate-c | lemniscate-a with z = A·sin ωτ                       |
//! | helix-a/b    | circle-a with a constant climb to −A over the window |
//! | sawtooth     | altitude ramps: down ¾ of a period, back up in ¼     |
//! | triangle     | altitude ramps: symmetric down/up halves             |
//!
//! Circle C and Helix B default to tangent yawing (yaw advances at 2π/period,
//! starting aligned with the initial velocity); everything else holds yaw
//! fixed. Piecewise-linear corner derivatives are taken from the left so
//! sampling is deterministic.

use crate::math::wrap_angle;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    CircleA,
    CircleB,
    CircleC,
    LemniscateA,
    LemniscateB,
    LemniscateC,
    HelixA,
    HelixB,
    Sawtooth,
    Triangle,
}

impl TrajectoryKind {
    pub const ALL: [TrajectoryKind; 10] = [
        TrajectoryKind::CircleA,
        TrajectoryKind::CircleB,
        TrajectoryKind::CircleC,
        TrajectoryKind::LemniscateA,
        TrajectoryKind::LemniscateB,
        TrajectoryKind::LemniscateC,
        TrajectoryKind::HelixA,
        TrajectoryKind::HelixB,
        TrajectoryKind::Sawtooth,
        TrajectoryKind::Triangle,
    ];

    /// The yaw behavior the kind's name implies.
    pub fn canonical_yaw_mode(&self) -> YawMode {
        match self {
            TrajectoryKind::CircleC | TrajectoryKind::HelixB => YawMode::TangentYawing,
            _ => YawMode::Fixed,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TrajectoryKind::CircleA => "circle-a",
            TrajectoryKind::CircleB => "circle-b",
            TrajectoryKind::CircleC => "circle-c",
            TrajectoryKind::LemniscateA => "lemniscate-a",
            TrajectoryKind::LemniscateB => "lemniscate-b",
            TrajectoryKind::LemniscateC => "lemniscate-c",
            TrajectoryKind::HelixA => "helix-a",
            TrajectoryKind::HelixB => "helix-b",
            TrajectoryKind::Sawtooth => "sawtooth",
            TrajectoryKind::Triangle => "triangle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YawMode {
    Fixed,
    TangentYawing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    HoverLead,
    Active,
    Return,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub radius: f64,
    pub period: f64,
    pub center: [f64; 3],
    pub z_amplitude: f64,
    /// None picks the kind's canonical mode.
    pub yaw_mode: Option<YawMode>,
    pub hover_lead: f64,
    pub total_time: f64,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            kind: TrajectoryKind::CircleA,
            radius: 0.8,
            period: 10.0,
            center: [0.0; 3],
            z_amplitude: 0.6,
            yaw_mode: None,
            hover_lead: 5.0,
            total_time: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReferenceSample {
    /// Position [m] and yaw [rad], yaw wrapped to (−π, π].
    pub r: [f64; 4],
    pub r_dot: [f64; 4],
    pub r_ddot: [f64; 4],
    pub phase: Phase,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajError {
    #[error("time {t} outside the reference window [0, {total_time}]")]
    OutOfWindow { t: f64, total_time: f64 },
    #[error("invalid trajectory spec: {0}")]
    InvalidSpec(&'static str),
}

impl TrajectorySpec {
    pub fn preset(kind: TrajectoryKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), TrajError> {
        if !(self.radius > 0.0) {
            return Err(TrajError::InvalidSpec("radius must be positive"));
        }
        if !(self.period > 0.0) {
            return Err(TrajError::InvalidSpec("period must be positive"));
        }
        if !(self.total_time > 0.0) {
            return Err(TrajError::InvalidSpec("total_time must be positive"));
        }
        if !(self.hover_lead >= 0.0) {
            return Err(TrajError::InvalidSpec("hover_lead must be nonnegative"));
        }
        if !(self.z_amplitude >= 0.0) {
            return Err(TrajError::InvalidSpec("z_amplitude must be nonnegative"));
        }
        if self.total_time <= 2.0 * self.hover_lead {
            return Err(TrajError::InvalidSpec(
                "total_time must exceed twice hover_lead for a nonempty active window",
            ));
        }
        Ok(())
    }

    pub fn resolved_yaw_mode(&self) -> YawMode {
        self.yaw_mode.unwrap_or_else(|| self.kind.canonical_yaw_mode())
    }

    /// Active window [start, end): hover-lead before, return tail after. The
    /// return tail mirrors the lead so episodes end settled.
    pub fn active_window(&self) -> (f64, f64) {
        (self.hover_lead, self.total_time - self.hover_lead)
    }

    fn active_duration(&self) -> f64 {
        self.total_time - 2.0 * self.hover_lead
    }

    /// Reference at time t with exact derivatives on the active interior.
    pub fn sample(&self, t: f64) -> Result<ReferenceSample, TrajError> {
        if !(t >= 0.0 && t <= self.total_time) || !t.is_finite() {
            return Err(TrajError::OutOfWindow { t, total_time: self.total_time });
        }
        let (t0, t1) = self.active_window();
        if t < t0 {
            let yaw = self.yaw_at(0.0);
            return Ok(self.hover_sample(yaw, Phase::HoverLead));
        }
        if t >= t1 {
            let yaw = self.yaw_at(self.active_duration());
            return Ok(self.hover_sample(yaw, Phase::Return));
        }
        let tau = t - t0;
        let (mut p, v, a) = self.geometry(tau);
        for i in 0..3 {
            p[i] += self.center[i];
        }
        let (yaw, yaw_rate) = match self.resolved_yaw_mode() {
            YawMode::Fixed => (self.yaw_at(0.0), 0.0),
            YawMode::TangentYawing => (self.yaw_at(tau), 2.0 * std::f64::consts::PI / self.period),
        };
        Ok(ReferenceSample {
            r: [p[0], p[1], p[2], yaw],
            r_dot: [v[0], v[1], v[2], yaw_rate],
            r_ddot: [a[0], a[1], a[2], 0.0],
            phase: Phase::Active,
        })
    }

    /// Future reference for the controller: r at t+T, clamped to the window.
    pub fn lookahead(&self, t: f64, horizon: f64) -> [f64; 4] {
        let tt = (t + horizon).clamp(0.0, self.total_time);
        self.sample(tt).expect("clamped time is inside the window").r
    }

    fn hover_sample(&self, yaw: f64, phase: Phase) -> ReferenceSample {
        ReferenceSample {
            r: [self.center[0], self.center[1], self.center[2], yaw],
            r_dot: [0.0; 4],
            r_ddot: [0.0; 4],
            phase,
        }
    }

    /// Yaw at active-window offset τ: fixed mode holds zero; tangent mode
    /// starts aligned with the initial velocity and advances at 2π/period.
    fn yaw_at(&self, tau: f64) -> f64 {
        match self.resolved_yaw_mode() {
            YawMode::Fixed => 0.0,
            YawMode::TangentYawing => {
                let (_, v0, _) = self.geometry(0.0);
                let psi0 = v0[1].atan2(v0[0]);
                wrap_angle(psi0 + 2.0 * std::f64::consts::PI / self.period * tau)
            }
        }
    }

    /// Center-relative position, velocity, acceleration at offset τ.
    fn geometry(&self, tau: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let w = 2.0 * std::f64::consts::PI / self.period;
        let r = self.radius;
        let (s, c) = (w * tau).sin_cos();
        let (s2, c2) = (2.0 * w * tau).sin_cos();
        match self.kind {
            TrajectoryKind::CircleA | TrajectoryKind::CircleC => (
                [r * c, r * s, 0.0],
                [-r * w * s, r * w * c, 0.0],
                [-r * w * w * c, -r * w * w * s, 0.0],
            ),
            TrajectoryKind::CircleB => (
                [r * c, 0.0, r * s],
                [-r * w * s, 0.0, r * w * c],
                [-r * w * w * c, 0.0, -r * w * w * s],
            ),
            TrajectoryKind::LemniscateA => (
                [r * s, 0.5 * r * s2, 0.0],
                [r * w * c, r * w * c2, 0.0],
                [-r * w * w * s, -2.0 * r * w * w * s2, 0.0],
            ),
            TrajectoryKind::LemniscateB => (
                [r * s, 0.0, 0.5 * r * s2],
                [r * w * c, 0.0, r * w * c2],
                [-r * w * w * s, 0.0, -2.0 * r * w * w * s2],
            ),
            TrajectoryKind::LemniscateC => {
                let a = self.z_amplitude;
                (
                    [r * s, 0.5 * r * s2, a * s],
                    [r * w * c, r * w * c2, a * w * c],
                    [-r * w * w * s, -2.0 * r * w * w * s2, -a * w * w * s],
                )
            }
            TrajectoryKind::HelixA | TrajectoryKind::HelixB => {
                let climb = -self.z_amplitude / self.active_duration();
                (
                    [r * c, r * s, climb * tau],
                    [-r * w * s, r * w * c, climb],
                    [-r * w * w * c, -r * w * w * s, 0.0],
                )
            }
            TrajectoryKind::Sawtooth => self.piecewise_altitude(tau, 0.75),
            TrajectoryKind::Triangle => self.piecewise_altitude(tau, 0.5),
        }
    }

    /// Altitude zigzag: climb to −z_amplitude over `down_frac` of a period,
    /// return over the rest. Corner derivatives are left-sided.
    fn piecewise_altitude(&self, tau: f64, down_frac: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let p = self.period;
        let a = self.z_amplitude;
        let mut m = tau.rem_euclid(p);
        if m == 0.0 && tau > 0.0 {
            m = p; // cycle boundary: take the left-sided branch
        }
        let split = down_frac * p;
        let (z, zdot) = if m <= split {
            (-a * m / split, -a / split)
        } else {
            let up = p - split;
            (-a * (1.0 - (m - split) / up), a / up)
        };
        ([0.0, 0.0, z], [0.0, 0.0, zdot], [0.0, 0.0, 0.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::wrap_diff;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn hover_lead_is_constant_at_center() {
        for kind in TrajectoryKind::ALL {
            let spec = TrajectorySpec {
                center: [1.0, -2.0, 0.5],
                ..TrajectorySpec::preset(kind)
            };
            for t in [0.0, 1.0, 4.999] {
                let s = spec.sample(t).unwrap();
                assert_eq!(s.phase, Phase::HoverLead);
                assert_eq!(&s.r[..3], &[1.0, -2.0, 0.5]);
                assert_eq!(s.r_dot, [0.0; 4]);
                assert_eq!(s.r_ddot, [0.0; 4]);
            }
        }
    }

    #[test]
    fn circle_active_start_and_rates() {
        let spec = TrajectorySpec::default();
        let s = spec.sample(spec.hover_lead).unwrap();
        assert_eq!(s.phase, Phase::Active);
        assert_relative_eq!(s.r[0], spec.radius, epsilon = 1e-12);
        assert_relative_eq!(s.r[1], 0.0, epsilon = 1e-12);
        let speed = 2.0 * PI * spec.radius / spec.period;
        assert_relative_eq!(s.r_dot[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.r_dot[1], speed, epsilon = 1e-12);
        // quarter period later the speed has rotated onto the x axis
        let q = spec.sample(spec.hover_lead + spec.period / 4.0).unwrap();
        assert_relative_eq!(q.r_dot[0], -speed, epsilon = 1e-12);
        assert_relative_eq!(q.r_dot[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn lookahead_clamps_to_window_end() {
        let spec = TrajectorySpec::default();
        let t = 10.0;
        assert_eq!(spec.lookahead(t, 0.0), spec.sample(t).unwrap().r);
        let end = spec.sample(spec.total_time).unwrap().r;
        assert_eq!(spec.lookahead(spec.total_time - 0.1, 5.0), end);
    }

    #[test]
    fn circle_half_period_lookahead_is_antipodal() {
        let spec = TrajectorySpec {
            center: [0.3, -0.4, 1.0],
            ..TrajectorySpec::default()
        };
        let t = spec.hover_lead + 1.7;
        let here = spec.sample(t).unwrap().r;
        let there = spec.lookahead(t, spec.period / 2.0);
        for i in 0..2 {
            assert_relative_eq!(
                here[i] + there[i],
                2.0 * spec.center[i],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let h = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for kind in TrajectoryKind::ALL {
            let spec = TrajectorySpec::preset(kind);
            let (t0, t1) = spec.active_window();
            let corners: Vec<f64> = match kind {
                TrajectoryKind::Sawtooth => vec![0.0, 7.5, 10.0, 17.5, 20.0],
                TrajectoryKind::Triangle => vec![0.0, 5.0, 10.0, 15.0, 20.0],
                _ => vec![],
            };
            let mut checked = 0;
            while checked < 200 {
                let t = rng.gen_range((t0 + 2.0 * h)..(t1 - 2.0 * h));
                let tau = t - t0;
                if corners.iter().any(|c| (tau - c).abs() < 10.0 * h) {
                    continue;
                }
                checked += 1;
                let sm = spec.sample(t - h).unwrap();
                let s0 = spec.sample(t).unwrap();
                let sp = spec.sample(t + h).unwrap();
                for i in 0..4 {
                    let fd = if i == 3 {
                        wrap_diff(sp.r[3], sm.r[3]) / (2.0 * h)
                    } else {
                        (sp.r[i] - sm.r[i]) / (2.0 * h)
                    };
                    assert!(
                        (fd - s0.r_dot[i]).abs() < 1e-5,
                        "{kind:?} channel {i} at t={t}: fd {fd} vs analytic {}",
                        s0.r_dot[i]
                    );
                    let fd2 = (sp.r_dot[i] - sm.r_dot[i]) / (2.0 * h);
                    assert!(
                        (fd2 - s0.r_ddot[i]).abs() < 1e-5,
                        "{kind:?} accel channel {i} at t={t}: fd {fd2} vs analytic {}",
                        s0.r_ddot[i]
                    );
                }
            }
        }
    }

    #[test]
    fn yaw_modes_behave() {
        let fixed = TrajectorySpec::preset(TrajectoryKind::CircleA);
        let yawing = TrajectorySpec::preset(TrajectoryKind::CircleC);
        assert_eq!(fixed.resolved_yaw_mode(), YawMode::Fixed);
        assert_eq!(yawing.resolved_yaw_mode(), YawMode::TangentYawing);
        let w = 2.0 * PI / yawing.period;
        let mut t = yawing.hover_lead;
        while t < yawing.total_time - yawing.hover_lead {
            let sf = fixed.sample(t).unwrap();
            assert_eq!(sf.r[3], 0.0);
            assert_eq!(sf.r_dot[3], 0.0);
            let sy = yawing.sample(t).unwrap();
            assert_relative_eq!(sy.r_dot[3], w, epsilon = 1e-12);
            assert!(sy.r[3] > -PI && sy.r[3] <= PI, "yaw must stay wrapped");
            t += 0.37;
        }
        // tangent start aligns with the initial velocity (+y for a circle)
        let start = yawing.sample(yawing.hover_lead).unwrap();
        assert_relative_eq!(start.r[3], PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_window_times_are_rejected() {
        let spec = TrajectorySpec::default();
        assert!(matches!(spec.sample(-0.1), Err(TrajError::OutOfWindow { .. })));
        assert!(matches!(
            spec.sample(spec.total_time + 0.1),
            Err(TrajError::OutOfWindow { .. })
        ));
        assert!(spec.sample(spec.total_time).is_ok());
    }

    #[test]
    fn phases_partition_the_window() {
        let spec = TrajectorySpec::default();
        assert_eq!(spec.sample(0.0).unwrap().phase, Phase::HoverLead);
        assert_eq!(spec.sample(5.0).unwrap().phase, Phase::Active);
        assert_eq!(spec.sample(24.999).unwrap().phase, Phase::Active);
        assert_eq!(spec.sample(25.0).unwrap().phase, Phase::Return);
        assert_eq!(spec.sample(30.0).unwrap().phase, Phase::Return);
    }

    #[test]
    fn continuous_inside_each_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for kind in TrajectoryKind::ALL {
            let spec = TrajectorySpec::preset(kind);
            for _ in 0..200 {
                let t = rng.gen_range(0.0..spec.total_time - 1e-6);
                let a = spec.sample(t).unwrap();
                let b = spec.sample(t + 1e-6).unwrap();
                if a.phase != b.phase {
                    continue;
                }
                for i in 0..3 {
                    assert!(
                        (a.r[i] - b.r[i]).abs() < 1e-4,
                        "{kind:?} jumps inside phase {:?} at t={t}",
                        a.phase
                    );
                }
            }
        }
    }

    #[test]
    fn piecewise_corners_use_left_derivatives() {
        let saw = TrajectorySpec::preset(TrajectoryKind::Sawtooth);
        let a = saw.z_amplitude;
        let p = saw.period;
        // bottom corner at 3/4 period: still descending branch
        let s = saw.sample(saw.hover_lead + 0.75 * p).unwrap();
        assert_relative_eq!(s.r[2], -a, epsilon = 1e-12);
        assert_relative_eq!(s.r_dot[2], -a / (0.75 * p), epsilon = 1e-12);
        // cycle boundary: left-sided slope is the fast return branch
        let s = saw.sample(saw.hover_lead + p).unwrap();
        assert_relative_eq!(s.r[2], 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.r_dot[2], a / (0.25 * p), epsilon = 1e-12);

        let tri = TrajectorySpec::preset(TrajectoryKind::Triangle);
        let s = tri.sample(tri.hover_lead + 0.5 * p).unwrap();
        assert_relative_eq!(s.r[2], -tri.z_amplitude, epsilon = 1e-12);
        assert_relative_eq!(s.r_dot[2], -2.0 * tri.z_amplitude / p, epsilon = 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(TrajectorySpec::default().validate().is_ok());
        assert!(TrajectorySpec { radius: 0.0, ..Default::default() }.validate().is_err());
        assert!(TrajectorySpec { period: -1.0, ..Default::default() }.validate().is_err());
        assert!(
            TrajectorySpec { hover_lead: 15.0, total_time: 30.0, ..Default::default() }
                .validate()
                .is_err()
        );
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = TrajectorySpec {
            kind: TrajectoryKind::HelixB,
            yaw_mode: Some(YawMode::TangentYawing),
            ..Default::default()
        };
        let text = toml::to_string(&spec).unwrap();
        let back: TrajectorySpec = toml::from_str(&text).unwrap();
        assert_eq!(back.kind, TrajectoryKind::HelixB);
        assert_eq!(back.resolved_yaw_mode(), YawMode::TangentYawing);
        // kind alone is enough; yaw mode falls back to the canonical choice
        let short: TrajectorySpec = toml::from_str("kind = \"circle-c\"").unwrap();
        assert_eq!(short.resolved_yaw_mode(), YawMode::TangentYawing);
    }
}
