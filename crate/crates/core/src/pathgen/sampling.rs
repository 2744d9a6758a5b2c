//! Discrete Fresnel pre-sampling and time-gridded path utilities.

use serde::{Deserialize, Serialize};

use super::CurvatureProfile;
use crate::vehicle::{EgoState, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub rho: f64,
    pub v_x: f64,
}

impl PathSample {
    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.psi)
    }
}

/// Uniformly time-sampled path. Sample coordinates are expressed in `frame`,
/// itself a pose in the world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub samples: Vec<PathSample>,
    pub dt: f64,
    pub frame: Pose,
    pub profile: CurvatureProfile,
}

/// Pre-samples `profile` in a frame anchored at the origin.
pub fn presample_profile(profile: &CurvatureProfile, dt: f64) -> SampledPath {
    presample_profile_in(profile, dt, Pose::default())
}

/// Discrete Fresnel integration of the profile on a `dt` grid:
///
/// ```text
/// ψ(k) = ψ(k−1) + ρ(k) v(k) Δt
/// y(k) = y(k−1) + sin ψ(k) v(k) Δt
/// x(k) = x(k−1) + cos ψ(k) v(k) Δt
/// ```
///
/// starting from `(0, 0, ψ_start)`. The grid covers the whole profile; the
/// last sample may lie up to one step past t9, where the final breakpoint's
/// curvature and speed are held.
pub fn presample_profile_in(profile: &CurvatureProfile, dt: f64, frame: Pose) -> SampledPath {
    assert!(dt > 0.0, "sample spacing must be positive");
    let t0 = profile.start_time();
    let steps = (profile.duration() / dt - 1e-9).ceil().max(0.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut s = PathSample {
        t: t0,
        x: 0.0,
        y: 0.0,
        psi: profile.psi_start,
        rho: profile.curvature_at(t0),
        v_x: profile.velocity_at(t0),
    };
    samples.push(s);
    for k in 1..=steps {
        let t = t0 + k as f64 * dt;
        let rho = profile.curvature_at(t);
        let v = profile.velocity_at(t);
        let psi = s.psi + rho * v * dt;
        let (sn, cs) = psi.sin_cos();
        s = PathSample { t, x: s.x + cs * v * dt, y: s.y + sn * v * dt, psi, rho, v_x: v };
        samples.push(s);
    }
    SampledPath { samples, dt, frame, profile: profile.clone() }
}

impl SampledPath {
    /// Straight constant-speed path along the ego heading.
    pub fn straight(ego: &EgoState, duration: f64, dt: f64) -> Self {
        let profile = CurvatureProfile::constant(0.0, ego.v_x, 0.0, duration);
        presample_profile_in(&profile, dt, ego.pose())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    pub fn terminal(&self) -> &PathSample {
        &self.samples[self.samples.len() - 1]
    }

    /// Sample interpolated at time `t` (clamped to the grid), in path coordinates.
    pub fn sample_at(&self, t: f64) -> PathSample {
        let n = self.samples.len();
        let first = &self.samples[0];
        if n == 1 || t <= first.t {
            return *first;
        }
        if t >= self.end_time() {
            return self.samples[n - 1];
        }
        let f = (t - first.t) / self.dt;
        let i = (f.floor() as usize).min(n - 2);
        let (p, q) = (&self.samples[i], &self.samples[i + 1]);
        let s = ((t - p.t) / (q.t - p.t)).clamp(0.0, 1.0);
        let lerp = |a: f64, b: f64| a + s * (b - a);
        PathSample {
            t,
            x: lerp(p.x, q.x),
            y: lerp(p.y, q.y),
            psi: lerp(p.psi, q.psi),
            rho: lerp(p.rho, q.rho),
            v_x: lerp(p.v_x, q.v_x),
        }
    }

    /// World pose at time `t`.
    pub fn world_pose_at(&self, t: f64) -> Pose {
        self.frame.compose(&self.sample_at(t).pose())
    }

    pub fn world_pose(&self, i: usize) -> Pose {
        self.frame.compose(&self.samples[i].pose())
    }

    /// Re-expresses the samples in another frame (given in world coordinates).
    pub fn to_frame(&self, frame: Pose) -> SampledPath {
        let rel = frame.relative(&self.frame);
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let p = rel.compose(&s.pose());
                PathSample { x: p.x, y: p.y, psi: p.psi, ..*s }
            })
            .collect();
        SampledPath { samples, dt: self.dt, frame, profile: self.profile.clone() }
    }

    /// Remaining path from `t` on, re-timed to start at zero. The first sample
    /// is the grid sample at or just before `t`.
    pub fn suffix_from(&self, t: f64) -> SampledPath {
        let f = ((t - self.start_time()) / self.dt + 1e-9).floor().max(0.0) as usize;
        let i0 = f.min(self.samples.len() - 1);
        let t_ref = self.samples[i0].t;
        let samples = self.samples[i0..].iter().map(|s| PathSample { t: s.t - t_ref, ..*s }).collect();
        SampledPath { samples, dt: self.dt, frame: self.frame, profile: self.profile.clone() }
    }

    /// Re-integrates the underlying profile on a new grid.
    pub fn resample(&self, dt: f64) -> SampledPath {
        presample_profile_in(&self.profile, dt, self.frame)
    }
}
