//! Clothoid evasive-path generation.
//!
//! A manoeuvre is described in "action space" by ten breakpoints
//! `t0..t9`, each carrying a curvature and a speed: pre-braking (t0→t1),
//! curvature build-up to the evasion peak (t1→t2), an optional constant
//! plateau (t2→t3), unwind to road curvature (t3→t4), an optional straight
//! offset run (t4→t5), counter-steer (t5→t8, with optional plateau t6→t7)
//! and a stabilisation tail (t8→t9). Curvature is linear in time between
//! breakpoints, so every segment is a clothoid at constant speed.
//!
//! Profiles are pre-sampled with the discrete Fresnel recursion and scaled
//! into a family that fits the driveable space on one side of the vehicle.

mod family;
mod profile;
mod sampling;

pub use family::{generate_path_set, replan, PathMember, PathSet};
pub use profile::{
    build_max_severity_profile, build_profile, heading_headroom, Breakpoint, CurvatureProfile,
};
pub use sampling::{presample_profile, presample_profile_in, PathSample, SampledPath};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Side of the evasion; left is positive lateral direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

fn default_n_tot() -> usize {
    10
}
fn default_dt_presample() -> f64 {
    0.01
}
fn default_min_clearance() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathTuning {
    /// Pre-braking duration [s].
    pub t_pb: f64,
    /// Maximum heading relative to the road during the manoeuvre [rad].
    pub psi_max: f64,
    /// Counter-steer curvature as a fraction of the peak curvature.
    pub i_sb: f64,
    /// Constant road curvature [1/m].
    #[serde(default)]
    pub rho_road: f64,
    /// Extra lateral offset gained on the straight t4→t5 run [m].
    #[serde(default)]
    pub y_offset: f64,
    /// Duration of the stabilisation tail t8→t9 [s].
    pub t_stabilize: f64,
    #[serde(default = "default_n_tot")]
    pub n_tot: usize,
    #[serde(default = "default_dt_presample")]
    pub dt_presample: f64,
    /// Clearance kept between the footprint side and the driveable boundary [m].
    #[serde(default)]
    pub lateral_margin: f64,
    /// Smallest usable lateral extent; below it no path set is produced [m].
    #[serde(default = "default_min_clearance")]
    pub min_lateral_clearance: f64,
}

impl Default for PathTuning {
    fn default() -> Self {
        Self {
            t_pb: 0.0,
            psi_max: 0.2,
            i_sb: 0.8,
            rho_road: 0.0,
            y_offset: 0.0,
            t_stabilize: 1.0,
            n_tot: default_n_tot(),
            dt_presample: default_dt_presample(),
            lateral_margin: 0.0,
            min_lateral_clearance: default_min_clearance(),
        }
    }
}

impl PathTuning {
    pub fn validate(&self) -> Result<(), PathError> {
        let bad = |what: &str| Err(PathError::InvalidTuning(what.to_string()));
        if !(self.t_pb >= 0.0 && self.t_pb.is_finite()) {
            return bad("t_pb must be finite and non-negative");
        }
        if !(self.psi_max > 0.0 && self.psi_max < std::f64::consts::FRAC_PI_2) {
            return bad("psi_max must lie in (0, π/2)");
        }
        if !(self.i_sb > 0.0 && self.i_sb <= 1.0) {
            return bad("i_sb must lie in (0, 1]");
        }
        if !self.rho_road.is_finite() {
            return bad("rho_road must be finite");
        }
        if !(self.y_offset >= 0.0 && self.y_offset.is_finite()) {
            return bad("y_offset must be finite and non-negative");
        }
        if !(self.t_stabilize >= 0.0 && self.t_stabilize.is_finite()) {
            return bad("t_stabilize must be finite and non-negative");
        }
        if self.n_tot == 0 {
            return bad("n_tot must be at least 1");
        }
        if !(self.dt_presample > 0.0 && self.dt_presample.is_finite()) {
            return bad("dt_presample must be positive");
        }
        if !(self.lateral_margin >= 0.0 && self.min_lateral_clearance >= 0.0) {
            return bad("lateral margins must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("no heading headroom to evade (headroom {headroom:.4} rad)")]
    InfeasibleProfile { headroom: f64 },
    #[error("lateral extent {y_desired:.3} m is below the minimum clearance {min_clearance:.3} m")]
    NoFeasiblePath { y_desired: f64, min_clearance: f64 },
    #[error("no member of the path family fits the driveable space")]
    EmptyFamily,
    #[error("invalid path tuning: {0}")]
    InvalidTuning(String),
    #[error("invalid planning input: {0}")]
    InvalidInput(String),
}
