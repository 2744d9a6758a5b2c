//! Path tracking: frame transformation, tracking errors, steady-state
//! feedforward, pole-placement feedback for steering and differential
//! braking, and per-wheel brake allocation.

mod allocation;
mod gains;
mod tracking;

pub use allocation::{allocate_brakes, induced_moment, BrakeAllocation, BrakeForces};
pub use gains::{braking_gain_formulas, feedback_gains, steering_gain_formulas, Gains};
pub use tracking::{path_to_vehicle_frame, tracking_errors, TrackingErrors};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::LinearSingleTrack;
use crate::plant::PlantState;
use crate::vehicle::VehicleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    SteeringOnly,
    DiffBrakeOnly,
    Combined,
}

fn default_sigma() -> f64 {
    -3.0
}
fn default_split() -> f64 {
    0.5
}
fn default_dt_control() -> f64 {
    0.01
}
fn default_u_min() -> f64 {
    1.0
}
fn default_force_cap() -> f64 {
    f64::INFINITY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    #[serde(default = "default_sigma")]
    pub sigma_1: f64,
    #[serde(default = "default_sigma")]
    pub sigma_2: f64,
    /// Imaginary part for a conjugate pair `sigma_1 ± i·sigma_imag`; requires
    /// `sigma_1 == sigma_2`.
    #[serde(default)]
    pub sigma_imag: f64,
    pub mode: ControlMode,
    #[serde(default = "default_split")]
    pub i_f: f64,
    #[serde(default = "default_split")]
    pub i_r: f64,
    #[serde(default = "default_dt_control")]
    pub dt_control: f64,
    /// Gains are refused below this speed [m/s].
    #[serde(default = "default_u_min")]
    pub u_min: f64,
    /// Per-wheel brake force limit [N].
    #[serde(default = "default_force_cap")]
    pub brake_force_cap: f64,
    /// Feed back the heading error relative to the steady-state sideslip the
    /// vehicle needs on the current curvature.
    #[serde(default)]
    pub sideslip_compensation: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            sigma_1: default_sigma(),
            sigma_2: default_sigma(),
            sigma_imag: 0.0,
            mode: ControlMode::SteeringOnly,
            i_f: default_split(),
            i_r: default_split(),
            dt_control: default_dt_control(),
            u_min: default_u_min(),
            brake_force_cap: default_force_cap(),
            sideslip_compensation: false,
        }
    }
}

impl ControllerConfig {
    /// `(σ1 + σ2, σ1·σ2)`.
    pub fn pole_sum_product(&self) -> (f64, f64) {
        if self.sigma_imag != 0.0 {
            (2.0 * self.sigma_1, self.sigma_1 * self.sigma_1 + self.sigma_imag * self.sigma_imag)
        } else {
            (self.sigma_1 + self.sigma_2, self.sigma_1 * self.sigma_2)
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |s: String| Err(ControlError::InvalidConfig(s));
        if !(self.sigma_1 < 0.0 && self.sigma_2 < 0.0) {
            return bad(format!("poles must lie in the open left half plane (got {}, {})", self.sigma_1, self.sigma_2));
        }
        if self.sigma_imag != 0.0 && self.sigma_1 != self.sigma_2 {
            return bad("a complex pole pair needs sigma_1 == sigma_2".into());
        }
        if !(self.i_f >= 0.0 && self.i_r >= 0.0 && (self.i_f + self.i_r - 1.0).abs() < 1e-9) {
            return bad(format!("brake split {} / {} must be non-negative and sum to 1", self.i_f, self.i_r));
        }
        if !(self.dt_control > 0.0) || !(self.u_min > 0.0) || !(self.brake_force_cap > 0.0) {
            return bad("dt_control, u_min and brake_force_cap must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("speed {u} m/s below controller minimum {u_min} m/s")]
    SpeedOutOfRange { u: f64, u_min: f64 },
    #[error("path exhausted at t = {t}")]
    PathExhausted { t: f64 },
    #[error("empty path")]
    EmptyPath,
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlCommand {
    pub delta_g: f64,
    /// Yaw moment reproduced by `brake_forces` [N·m].
    pub m_z_ext: f64,
    /// Yaw moment asked for before the per-wheel cap [N·m].
    pub m_z_requested: f64,
    pub brake_forces: BrakeForces,
    pub delta_ff: f64,
    pub m_ff: f64,
    /// Steering command hit ±δ_max.
    pub steer_saturated: bool,
    pub brake_saturated: bool,
}

impl ControlCommand {
    pub fn passive(delta_g: f64) -> Self {
        Self {
            delta_g,
            m_z_ext: 0.0,
            m_z_requested: 0.0,
            brake_forces: BrakeForces::default(),
            delta_ff: 0.0,
            m_ff: 0.0,
            steer_saturated: false,
            brake_saturated: false,
        }
    }
}

/// `δ_ff = (K_δ u² + l) κ`.
pub fn steering_feedforward(k_delta: f64, l: f64, u: f64, kappa: f64) -> f64 {
    (k_delta * u * u + l) * kappa
}

/// Steady-state feedforward `(δ_ff, M_ff)` for the given mode.
/// `delta_g_actual` is the steering angle the vehicle actually has; in
/// combined mode the caller passes the commanded angle.
pub fn feedforward(kappa: f64, u: f64, delta_g_actual: f64, params: &VehicleParams, mode: ControlMode) -> (f64, f64) {
    let model = LinearSingleTrack::from_params(params);
    let l = model.wheelbase();
    let needed = steering_feedforward(model.understeer_coefficient(), l, u, kappa);
    let m_ff = |delta: f64| l * model.cf * model.cr / (model.cf + model.cr) * (delta - needed);
    match mode {
        ControlMode::SteeringOnly => (needed, 0.0),
        ControlMode::DiffBrakeOnly => (0.0, m_ff(delta_g_actual)),
        ControlMode::Combined => (needed, m_ff(delta_g_actual)),
    }
}

/// `u = K·y + u_ff` followed by steering saturation and brake allocation.
pub fn control_step(
    err: &TrackingErrors,
    plant: &PlantState,
    params: &VehicleParams,
    cfg: &ControllerConfig,
) -> Result<ControlCommand, ControlError> {
    let u = plant.u;
    let g = feedback_gains(params, u, cfg)?;
    let model = LinearSingleTrack::from_params(params);
    let mut psi_fb = err.psi_e;
    if cfg.sideslip_compensation {
        let v_ss = match cfg.mode {
            ControlMode::DiffBrakeOnly => model.steady_sideslip_braking(u, err.kappa, plant.delta_g),
            _ => model.steady_sideslip_steering(u, err.kappa),
        };
        psi_fb -= v_ss / u;
    }
    let y = [err.y_e, err.y_e_dot, psi_fb, err.psi_e_dot];
    let dot = |k: &[f64; 4]| k.iter().zip(y).map(|(k, y)| k * y).sum::<f64>();

    let (delta_ff, _) = feedforward(err.kappa, u, 0.0, params, ControlMode::SteeringOnly);
    let (delta_cmd, m_ff, m_fb) = match cfg.mode {
        ControlMode::SteeringOnly => (delta_ff + dot(&g.steer), 0.0, 0.0),
        ControlMode::DiffBrakeOnly => {
            let (_, m_ff) = feedforward(err.kappa, u, plant.delta_g, params, cfg.mode);
            (plant.delta_g, m_ff, dot(&g.brake))
        }
        ControlMode::Combined => {
            let raw = delta_ff + dot(&g.steer);
            let sat = raw.clamp(-params.delta_max, params.delta_max);
            let (_, m_ff) = feedforward(err.kappa, u, sat, params, cfg.mode);
            (raw, m_ff, dot(&g.brake))
        }
    };
    let delta_g = delta_cmd.clamp(-params.delta_max, params.delta_max);
    let m_req = m_ff + m_fb;
    let alloc = allocate_brakes(m_req, params, cfg);
    Ok(ControlCommand {
        delta_g,
        m_z_ext: alloc.achieved_moment,
        m_z_requested: m_req,
        brake_forces: alloc.forces,
        delta_ff: if cfg.mode == ControlMode::DiffBrakeOnly { 0.0 } else { delta_ff },
        m_ff,
        steer_saturated: delta_g != delta_cmd,
        brake_saturated: alloc.saturated,
    })
}
