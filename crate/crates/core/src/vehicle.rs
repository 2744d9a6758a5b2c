//! Vehicle constants, planar poses and the measured ego state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GRAVITY: f64 = 9.81;

fn default_gravity() -> f64 {
    GRAVITY
}

/// Static vehicle and actuator constants.
///
/// Cornering stiffnesses are stored as positive magnitudes; the lateral
/// dynamics in [`crate::model`] apply the sign convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// Mass [kg].
    pub m: f64,
    /// CG to front axle [m].
    pub a: f64,
    /// CG to rear axle [m].
    pub b: f64,
    /// CG height [m].
    pub h_cog: f64,
    /// Track width [m].
    pub w: f64,
    /// Front axle cornering stiffness magnitude [N/rad].
    pub c_f: f64,
    /// Rear axle cornering stiffness magnitude [N/rad].
    pub c_r: f64,
    /// Yaw inertia [kg m^2].
    pub i_zz: f64,
    pub mu_f: f64,
    pub mu_r: f64,
    /// Brake effectiveness factors in [0, 1].
    pub s_f: f64,
    pub s_r: f64,
    /// Maximum road-wheel steering angle [rad].
    pub delta_max: f64,
    #[serde(default = "default_gravity")]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("vehicle parameter `{name}` = {value} is invalid: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

impl VehicleParams {
    /// Mid-size passenger car used throughout the tests and scenarios.
    pub fn reference() -> Self {
        Self {
            m: 2000.0,
            a: 1.4,
            b: 1.6,
            h_cog: 0.55,
            w: 1.6,
            c_f: 1.0e5,
            c_r: 1.0e5,
            i_zz: 3500.0,
            mu_f: 1.0,
            mu_r: 1.0,
            s_f: 1.0,
            s_r: 1.0,
            delta_max: 0.1,
            g: GRAVITY,
        }
    }

    pub fn wheelbase(&self) -> f64 {
        self.a + self.b
    }

    /// Lowest axle friction coefficient; bounds the usable lateral acceleration.
    pub fn mu_min(&self) -> f64 {
        self.mu_f.min(self.mu_r)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let checks: [(&'static str, f64, bool, &'static str); 14] = [
            ("m", self.m, self.m > 0.0, "must be positive"),
            ("a", self.a, self.a.is_finite(), "must be finite"),
            ("b", self.b, self.b.is_finite(), "must be finite"),
            ("l", self.wheelbase(), self.wheelbase() > 0.0, "wheelbase a+b must be positive"),
            ("h_cog", self.h_cog, self.h_cog >= 0.0, "must be non-negative"),
            ("w", self.w, self.w > 0.0, "must be positive"),
            ("c_f", self.c_f, self.c_f > 0.0, "must be positive"),
            ("c_r", self.c_r, self.c_r > 0.0, "must be positive"),
            ("i_zz", self.i_zz, self.i_zz > 0.0, "must be positive"),
            ("mu_f", self.mu_f, self.mu_f >= 0.0, "must be non-negative"),
            ("mu_r", self.mu_r, self.mu_r >= 0.0, "must be non-negative"),
            ("s_f", self.s_f, (0.0..=1.0).contains(&self.s_f), "must lie in [0, 1]"),
            ("s_r", self.s_r, (0.0..=1.0).contains(&self.s_r), "must lie in [0, 1]"),
            ("delta_max", self.delta_max, self.delta_max > 0.0, "must be positive"),
        ];
        for (name, value, ok, reason) in checks {
            if !ok || !value.is_finite() {
                return Err(ParamError::Invalid { name, value, reason });
            }
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(ParamError::Invalid { name: "g", value: self.g, reason: "must be positive" });
        }
        Ok(())
    }
}

/// Planar pose: position plus heading, counter-clockwise positive.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi }
    }

    /// Maps a point given in this pose's local frame into the parent frame.
    pub fn apply(&self, px: f64, py: f64) -> (f64, f64) {
        let (s, c) = self.psi.sin_cos();
        (self.x + c * px - s * py, self.y + s * px + c * py)
    }

    /// Maps a parent-frame point into this pose's local frame.
    pub fn apply_inverse(&self, px: f64, py: f64) -> (f64, f64) {
        let (s, c) = self.psi.sin_cos();
        let (dx, dy) = (px - self.x, py - self.y);
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// `self ∘ local`: a pose expressed in this frame, lifted to the parent frame.
    pub fn compose(&self, local: &Pose) -> Pose {
        let (x, y) = self.apply(local.x, local.y);
        Pose::new(x, y, self.psi + local.psi)
    }

    /// Expresses a parent-frame pose relative to this one.
    pub fn relative(&self, other: &Pose) -> Pose {
        let (x, y) = self.apply_inverse(other.x, other.y);
        Pose::new(x, y, other.psi - self.psi)
    }
}

/// Measured ego state at the planning instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v_x: f64,
    #[serde(default)]
    pub a_x: f64,
    #[serde(default)]
    pub yaw_rate: f64,
}

impl EgoState {
    pub fn new(x: f64, y: f64, psi: f64, v_x: f64) -> Self {
        Self { x, y, psi, v_x, a_x: 0.0, yaw_rate: 0.0 }
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.psi)
    }
}

/// Wraps an angle to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_params_validate() {
        VehicleParams::reference().validate().unwrap();
        let mut p = VehicleParams::reference();
        p.s_f = 1.5;
        assert!(matches!(p.validate(), Err(ParamError::Invalid { name: "s_f", .. })));
        p = VehicleParams::reference();
        p.c_r = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn pose_round_trip() {
        let frame = Pose::new(3.0, -1.0, 0.7);
        let p = Pose::new(-2.0, 5.0, -0.3);
        let back = frame.compose(&frame.relative(&p));
        assert!((back.x - p.x).abs() < 1e-12);
        assert!((back.y - p.y).abs() < 1e-12);
        assert!((back.psi - p.psi).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_inverse() {
        let frame = Pose::new(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let (x, y) = frame.apply_inverse(1.0, 0.0);
        assert!(x.abs() < 1e-15 && (y + 1.0).abs() < 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.1) + 0.1).abs() < 1e-15);
    }
}
