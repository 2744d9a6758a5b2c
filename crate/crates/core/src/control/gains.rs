use serde::{Deserialize, Serialize};

use super::{ControlError, ControlMode, ControllerConfig};
use crate::model::LinearSingleTrack;
use crate::vehicle::VehicleParams;

/// Feedback rows acting on `[y_e, ẏ_e, ψ_e, ψ̇_e]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub steer: [f64; 4],
    pub brake: [f64; 4],
}

/// Steering row `[k_y, k_ẏ, k_ψ, k_ψ̇]` for stiffnesses in the caller's sign
/// convention; `s = σ1+σ2`, `p = σ1σ2`.
#[allow(clippy::too_many_arguments)]
pub fn steering_gain_formulas(m: f64, a: f64, b: f64, cf: f64, cr: f64, i_zz: f64, u: f64, s: f64, p: f64) -> [f64; 4] {
    let l = a + b;
    let d = a * cf - b * cr;
    let q = cf + cr;
    [
        (l / (u * u) + m * d / (l * cf * cr)) * p,
        -m * d / (l * cf * cr) * s - m * a / (cr * u) * p,
        -(l / u) * s - (q * i_zz / (cf * cr * l) + b * l / (u * u)) * p,
        q * i_zz / (cf * cr * l) * s + i_zz / (cr * u) * p,
    ]
}

/// Differential-braking row, same conventions as [`steering_gain_formulas`].
#[allow(clippy::too_many_arguments)]
pub fn braking_gain_formulas(m: f64, a: f64, b: f64, cf: f64, cr: f64, i_zz: f64, u: f64, s: f64, p: f64) -> [f64; 4] {
    let l = a + b;
    let d = a * cf - b * cr;
    let q = cf + cr;
    let c2l2 = cf * cr * l * l;
    [
        -(c2l2 / (u * u * q) + m * d / q) * p,
        m * c2l2 / (u * q * q) * p + (m * l * cf / q - m * b) * s,
        c2l2 / (u * q) * s + (i_zz - c2l2 * d / (u * u * q * q)) * p,
        -i_zz * s,
    ]
}

/// Gains at speed `u` for the configured poles; the row of an unused
/// actuator is zero.
pub fn feedback_gains(params: &VehicleParams, u: f64, cfg: &ControllerConfig) -> Result<Gains, ControlError> {
    if !(u >= cfg.u_min) {
        return Err(ControlError::SpeedOutOfRange { u, u_min: cfg.u_min });
    }
    let md = LinearSingleTrack::from_params(params);
    let (s, p) = cfg.pole_sum_product();
    let steer = || steering_gain_formulas(md.m, md.a, md.b, md.cf, md.cr, md.i_zz, u, s, p);
    let brake = || braking_gain_formulas(md.m, md.a, md.b, md.cf, md.cr, md.i_zz, u, s, p);
    Ok(match cfg.mode {
        ControlMode::SteeringOnly => Gains { steer: steer(), brake: [0.0; 4] },
        ControlMode::DiffBrakeOnly => Gains { steer: [0.0; 4], brake: brake() },
        ControlMode::Combined => Gains { steer: steer(), brake: brake() },
    })
}
