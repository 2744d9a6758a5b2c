use serde::{Deserialize, Serialize};

use super::ControllerConfig;
use crate::vehicle::VehicleParams;

/// Per-wheel brake force magnitudes [N].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BrakeForces {
    pub fl: f64,
    pub fr: f64,
    pub rl: f64,
    pub rr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrakeAllocation {
    pub forces: BrakeForces,
    pub achieved_moment: f64,
    pub saturated: bool,
}

/// Yaw moment of a set of brake forces: braking on the left side turns the
/// vehicle left (positive), `M = (t_w/2)(F_fl + F_rl − F_fr − F_rr)`.
pub fn induced_moment(f: &BrakeForces, track: f64) -> f64 {
    0.5 * track * (f.fl + f.rl - f.fr - f.rr)
}

/// One-sided allocation: a side force of `2|M|/t_w`, split front/rear by
/// `i_f`/`i_r`, on the left wheels for positive `M` and on the right wheels
/// for negative `M`. Each wheel is capped at `brake_force_cap`.
pub fn allocate_brakes(m_z: f64, params: &VehicleParams, cfg: &ControllerConfig) -> BrakeAllocation {
    let side = 2.0 * m_z.abs() / params.w;
    let cap = cfg.brake_force_cap;
    let (front, rear) = (side * cfg.i_f, side * cfg.i_r);
    let (fc, rc) = (front.min(cap), rear.min(cap));
    let forces = if m_z > 0.0 {
        BrakeForces { fl: fc, rl: rc, ..Default::default() }
    } else if m_z < 0.0 {
        BrakeForces { fr: fc, rr: rc, ..Default::default() }
    } else {
        BrakeForces::default()
    };
    BrakeAllocation { forces, achieved_moment: induced_moment(&forces, params.w), saturated: fc < front || rc < rear }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (VehicleParams, ControllerConfig) {
        let p = VehicleParams { w: 1.6, ..VehicleParams::reference() };
        (p, ControllerConfig { i_f: 0.7, i_r: 0.3, ..Default::default() })
    }

    #[test]
    fn zero_moment() {
        let (p, c) = setup();
        let a = allocate_brakes(0.0, &p, &c);
        assert_eq!(a.forces, BrakeForces::default());
        assert_eq!(a.achieved_moment, 0.0);
    }

    #[test]
    fn left_moment() {
        let (p, c) = setup();
        let a = allocate_brakes(1000.0, &p, &c);
        assert!((a.forces.fl - 875.0).abs() < 1e-9 && (a.forces.rl - 375.0).abs() < 1e-9);
        assert_eq!((a.forces.fr, a.forces.rr), (0.0, 0.0));
        assert!((a.achieved_moment - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn right_moment_mirrors() {
        let (p, c) = setup();
        let a = allocate_brakes(-1000.0, &p, &c);
        assert!((a.forces.fr - 875.0).abs() < 1e-9 && (a.forces.rr - 375.0).abs() < 1e-9);
        assert_eq!((a.forces.fl, a.forces.rl), (0.0, 0.0));
        assert!((a.achieved_moment + 1000.0).abs() < 1e-9);
    }

    #[test]
    fn cap_limits_achieved_moment() {
        let (p, mut c) = setup();
        c.brake_force_cap = 500.0;
        let a = allocate_brakes(1000.0, &p, &c);
        assert!(a.saturated);
        assert_eq!(a.forces.fl, 500.0);
        assert!((a.achieved_moment - 0.8 * 875.0).abs() < 1e-9);
    }
}
