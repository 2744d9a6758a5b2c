//! Simulation plant: the linear single-track model with an external yaw
//! moment, integrated by RK4 together with the global pose, plus target
//! motion lookup.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::ControlCommand;
use crate::geometry::{GeometryError, TargetTrack};
use crate::model::LinearSingleTrack;
use crate::vehicle::{EgoState, Pose, VehicleParams};

/// Sanity bounds beyond which the linear model is meaningless.
pub const MAX_LATERAL_VELOCITY: f64 = 30.0;
pub const MAX_YAW_RATE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    /// Longitudinal velocity [m/s].
    pub u: f64,
    /// Lateral velocity [m/s].
    pub v: f64,
    /// Yaw rate [rad/s].
    pub r: f64,
    /// Steering angle currently applied at the road wheels [rad].
    pub delta_g: f64,
}

impl PlantState {
    pub fn new(ego: EgoState) -> Self {
        Self { t: 0.0, x: ego.x, y: ego.y, psi: ego.psi, u: ego.v_x, v: 0.0, r: ego.yaw_rate, delta_g: 0.0 }
    }

    pub fn with_yaw_rate(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.psi)
    }

    pub fn ego(&self, a_x: f64) -> EgoState {
        EgoState { x: self.x, y: self.y, psi: self.psi, v_x: self.u, a_x, yaw_rate: self.r }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantFlags {
    /// Lateral acceleration at the end of the step [m/s²].
    pub a_y: f64,
    /// The tyre-force saturation guard was active during the step.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("numerical divergence at t = {t}: v = {v}, r = {r}")]
    NumericalDivergence { t: f64, v: f64, r: f64 },
    #[error("invalid step: {0}")]
    InvalidStep(String),
}

#[derive(Debug, Clone, Copy)]
struct Deriv {
    x: f64,
    y: f64,
    psi: f64,
    u: f64,
    v: f64,
    r: f64,
}

struct Rhs<'a> {
    model: &'a LinearSingleTrack,
    delta: f64,
    m_z: f64,
    a_x: f64,
    f_max: f64,
}

impl Rhs<'_> {
    fn lateral_force(&self, u: f64, v: f64, r: f64) -> (f64, f64, bool) {
        let md = self.model;
        let fyf = md.cf * ((v + md.a * r) / u - self.delta);
        let fyr = md.cr * (v - md.b * r) / u;
        let total = (fyf + fyr).abs();
        if total > self.f_max {
            let k = self.f_max / total;
            (fyf * k, fyr * k, true)
        } else {
            (fyf, fyr, false)
        }
    }

    fn eval(&self, s: &PlantState, sat: &mut bool) -> Deriv {
        let md = self.model;
        let (fyf, fyr, hit) = self.lateral_force(s.u, s.v, s.r);
        *sat |= hit;
        let (sn, cs) = s.psi.sin_cos();
        Deriv {
            x: s.u * cs - s.v * sn,
            y: s.u * sn + s.v * cs,
            psi: s.r,
            u: self.a_x,
            v: (fyf + fyr) / md.m - s.u * s.r,
            r: (md.a * fyf - md.b * fyr + self.m_z) / md.i_zz,
        }
    }
}

fn advance(s: &PlantState, d: &Deriv, h: f64) -> PlantState {
    PlantState {
        x: s.x + h * d.x,
        y: s.y + h * d.y,
        psi: s.psi + h * d.psi,
        u: s.u + h * d.u,
        v: s.v + h * d.v,
        r: s.r + h * d.r,
        ..*s
    }
}

/// One RK4 step with inputs `(δ_g, M_z,ext)` from `cmd` held constant.
/// `a_x_cmd` changes the longitudinal speed (pre-braking only); the speed is
/// floored at `u_min`.
pub fn plant_step(
    s: &PlantState,
    cmd: &ControlCommand,
    a_x_cmd: f64,
    dt: f64,
    params: &VehicleParams,
    u_min: f64,
) -> Result<(PlantState, PlantFlags), PlantError> {
    if !(dt > 0.0 && dt <= 0.01 + 1e-12) {
        return Err(PlantError::InvalidStep(format!("dt = {dt} outside (0, 0.01]")));
    }
    if !(cmd.delta_g.is_finite() && cmd.m_z_ext.is_finite() && a_x_cmd.is_finite()) {
        return Err(PlantError::InvalidStep("non-finite input".into()));
    }
    let model = LinearSingleTrack::from_params(params);
    let rhs = Rhs { model: &model, delta: cmd.delta_g, m_z: cmd.m_z_ext, a_x: a_x_cmd, f_max: params.mu_min() * params.m * params.g };
    let mut sat = false;
    let k1 = rhs.eval(s, &mut sat);
    let k2 = rhs.eval(&advance(s, &k1, 0.5 * dt), &mut sat);
    let k3 = rhs.eval(&advance(s, &k2, 0.5 * dt), &mut sat);
    let k4 = rhs.eval(&advance(s, &k3, dt), &mut sat);
    let comb = |a: f64, b: f64, c: f64, d: f64| dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    let mut n = PlantState {
        t: s.t + dt,
        x: s.x + comb(k1.x, k2.x, k3.x, k4.x),
        y: s.y + comb(k1.y, k2.y, k3.y, k4.y),
        psi: s.psi + comb(k1.psi, k2.psi, k3.psi, k4.psi),
        u: (s.u + comb(k1.u, k2.u, k3.u, k4.u)).max(u_min),
        v: s.v + comb(k1.v, k2.v, k3.v, k4.v),
        r: s.r + comb(k1.r, k2.r, k3.r, k4.r),
        delta_g: cmd.delta_g,
    };
    if !(n.v.abs() <= MAX_LATERAL_VELOCITY && n.r.abs() <= MAX_YAW_RATE) {
        return Err(PlantError::NumericalDivergence { t: n.t, v: n.v, r: n.r });
    }
    let (fyf, fyr, hit) = rhs.lateral_force(n.u, n.v, n.r);
    sat |= hit;
    // keep the clock on the nominal grid
    n.t = (n.t / dt).round() * dt;
    Ok((n, PlantFlags { a_y: (fyf + fyr) / model.m, saturated: sat }))
}

/// Pose of a target at `t_now` by interpolation of its prediction grid.
pub fn target_step(tr: &TargetTrack, t_now: f64) -> Result<Pose, GeometryError> {
    tr.pose_at(t_now)
}
