//! Longitudinal braking capability and curvature capability for the six
//! actuation scenarios (pre-braking or not × steering / differential braking /
//! both).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vehicle::{EgoState, VehicleParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum CapabilityScenario {
    PreBrakeSteering = 1,
    PreBrakeDiffBraking = 2,
    PreBrakeCombined = 3,
    Steering = 4,
    DiffBraking = 5,
    Combined = 6,
}

impl CapabilityScenario {
    pub const ALL: [CapabilityScenario; 6] = [
        Self::PreBrakeSteering,
        Self::PreBrakeDiffBraking,
        Self::PreBrakeCombined,
        Self::Steering,
        Self::DiffBraking,
        Self::Combined,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.id() == id)
    }

    pub fn prebraking(self) -> bool {
        self.id() <= 3
    }

    pub fn steering(self) -> bool {
        matches!(self, Self::PreBrakeSteering | Self::PreBrakeCombined | Self::Steering | Self::Combined)
    }

    pub fn diff_braking(self) -> bool {
        matches!(
            self,
            Self::PreBrakeDiffBraking | Self::PreBrakeCombined | Self::DiffBraking | Self::Combined
        )
    }

    /// Same actuation without the pre-braking phase (identity for rows 4–6).
    pub fn without_prebraking(self) -> Self {
        match self {
            Self::PreBrakeSteering => Self::Steering,
            Self::PreBrakeDiffBraking => Self::DiffBraking,
            Self::PreBrakeCombined => Self::Combined,
            other => other,
        }
    }
}

impl TryFrom<u8> for CapabilityScenario {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Self::from_id(v).ok_or_else(|| format!("capability scenario must be 1..=6, got {v}"))
    }
}

impl From<CapabilityScenario> for u8 {
    fn from(s: CapabilityScenario) -> u8 {
        s.id()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityTuning {
    /// Pre-braking duration [s].
    pub t_pb: f64,
    /// Comfort / controllability lateral acceleration limit [m/s^2]; `inf` disables it.
    pub a_y_threshold: f64,
    /// Maximum curvature rate [1/(m s)].
    pub rho_dot_max: f64,
    /// Lowest speed at which an evasion is still planned [m/s].
    pub v_min: f64,
}

impl Default for CapabilityTuning {
    fn default() -> Self {
        Self { t_pb: 0.0, a_y_threshold: f64::INFINITY, rho_dot_max: 0.2, v_min: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityRecord {
    pub scenario: CapabilityScenario,
    /// Maximum braking deceleration (≤ 0) [m/s^2].
    pub a_x_min: f64,
    /// Saturated steady-state curvature bound [1/m].
    pub rho_max: f64,
    pub rho_dot_max: f64,
    /// Speed at the start of the lateral evasion [m/s].
    pub v_x_evasion: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapabilityError {
    #[error("evasion speed {v_x_evasion:.3} m/s is at or below the minimum {v_min:.3} m/s")]
    DegenerateSpeed { v_x_evasion: f64, v_min: f64 },
    #[error("curvature rate limit must be positive, got {0}")]
    InvalidRate(f64),
}

/// Front and rear axle normal forces under longitudinal acceleration `a_x`.
///
/// The static split follows the convention used by the planner's source
/// model (front share a/l), not the more common b/l.
pub fn axle_normal_forces(p: &VehicleParams, a_x: f64) -> (f64, f64) {
    let l = p.wheelbase();
    let f = p.a / l * p.m * p.g - p.h_cog / l * p.m * a_x;
    let r = p.b / l * p.m * p.g + p.h_cog / l * p.m * a_x;
    (f, r)
}

/// Maximum braking deceleration given the current measured acceleration.
pub fn longitudinal_capability(p: &VehicleParams, state: &EgoState) -> f64 {
    let (f_nf, f_nr) = axle_normal_forces(p, state.a_x);
    let f_x = -p.mu_f * f_nf * p.s_f - p.mu_r * f_nr * p.s_r;
    // -0.0 would leak into traces as "-0"
    (f_x / p.m).min(0.0) + 0.0
}

/// Understeer gradient used by the steering capability bound.
pub fn steering_understeer_gradient(p: &VehicleParams) -> f64 {
    p.m / p.wheelbase() * (p.b / p.c_f + p.a / p.c_r)
}

/// Steady-state curvature reachable with full steering at speed `v`.
pub fn steering_curvature(p: &VehicleParams, v: f64) -> f64 {
    p.delta_max.abs() / (p.wheelbase() + steering_understeer_gradient(p) * v * v / p.g)
}

/// Steady-state curvature reachable by differential braking alone.
///
/// Past the speed where the denominator changes sign the steady-state
/// relation no longer bounds anything; it returns +∞ so that friction
/// saturation governs.
pub fn diff_braking_curvature(p: &VehicleParams, v: f64) -> f64 {
    let den = 4.0 * (p.c_f * p.c_r - p.m * v * v * (p.b * p.c_r - p.a * p.c_f));
    if den <= 0.0 {
        return f64::INFINITY;
    }
    p.w * (p.c_f + p.c_r) * p.mu_min() * p.m * p.g / den
}

pub fn friction_curvature(p: &VehicleParams, v: f64) -> f64 {
    p.mu_min() * p.g / (v * v)
}

pub fn threshold_curvature(a_y_threshold: f64, v: f64) -> f64 {
    a_y_threshold / (v * v)
}

/// Unsaturated curvature capability: steering and/or differential braking term.
pub fn raw_curvature(scenario: CapabilityScenario, p: &VehicleParams, v: f64) -> f64 {
    let mut rho = 0.0;
    if scenario.steering() {
        rho += steering_curvature(p, v);
    }
    if scenario.diff_braking() {
        rho += diff_braking_curvature(p, v);
    }
    rho
}

pub fn evasion_speed(scenario: CapabilityScenario, a_x_min: f64, v0: f64, t_pb: f64) -> f64 {
    if scenario.prebraking() {
        a_x_min * t_pb + v0
    } else {
        v0
    }
}

pub fn lateral_capability(
    scenario: CapabilityScenario,
    p: &VehicleParams,
    state: &EgoState,
    tuning: &CapabilityTuning,
) -> Result<CapabilityRecord, CapabilityError> {
    if !(tuning.rho_dot_max > 0.0) {
        return Err(CapabilityError::InvalidRate(tuning.rho_dot_max));
    }
    let a_x_min = longitudinal_capability(p, state);
    let v = evasion_speed(scenario, a_x_min, state.v_x, tuning.t_pb);
    if !(v > tuning.v_min) {
        return Err(CapabilityError::DegenerateSpeed { v_x_evasion: v, v_min: tuning.v_min });
    }
    let rho_max = raw_curvature(scenario, p, v)
        .min(friction_curvature(p, v))
        .min(threshold_curvature(tuning.a_y_threshold, v));
    Ok(CapabilityRecord {
        scenario,
        a_x_min,
        rho_max,
        rho_dot_max: tuning.rho_dot_max,
        v_x_evasion: v,
    })
}

/// One entry per actuation scenario; unavailable rows carry their error.
pub fn capability_table(
    p: &VehicleParams,
    state: &EgoState,
    tuning: &CapabilityTuning,
) -> Vec<Result<CapabilityRecord, CapabilityError>> {
    CapabilityScenario::ALL
        .iter()
        .map(|&s| lateral_capability(s, p, state, tuning))
        .collect()
}
