//! Scaling the maximum-severity manoeuvre into a family of paths that fits
//! the driveable space on one side.

use serde::{Deserialize, Serialize};

use super::{build_profile, heading_headroom, presample_profile_in, PathError, PathTuning, SampledPath, Side};
use crate::capability::CapabilityRecord;
use crate::geometry::{DriveableSpace, Footprint};
use crate::vehicle::{EgoState, Pose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMember {
    /// Family index `n` in `1..=n_tot`.
    pub n: usize,
    pub rho_limit: f64,
    pub psi_limit: f64,
    pub path: SampledPath,
}

impl PathMember {
    pub fn terminal_offset(&self) -> f64 {
        self.path.terminal().y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub side: Side,
    pub generation_time: f64,
    pub n_tot: usize,
    /// Overall scale applied to ρ_max and ψ_max.
    pub scale: f64,
    /// Lateral room available on `side` [m].
    pub y_desired: f64,
    /// Terminal lateral offset of the unscaled maximum-severity path [m].
    pub y_max: f64,
    /// Members ordered by ascending curvature bound.
    pub members: Vec<PathMember>,
}

impl PathSet {
    pub fn paths(&self) -> impl Iterator<Item = &SampledPath> {
        self.members.iter().map(|m| &m.path)
    }
}

const OVERFLOW_ITERATIONS: usize = 30;

/// Builds the family for `side` starting from `init`.
///
/// The unscaled manoeuvre is pre-sampled to get its terminal offset `y_max`;
/// member `n` then uses `ρ_max,n = s·ρ_max·√(n/n_tot)` and `ψ_max,n = s·ψ_max·√(n/n_tot)`
/// with `s = min(1, y_desired / y_max)`. Because the terminal offset is only
/// roughly linear in `s`, `s` is shrunk further while the widest member still
/// overshoots `y_desired`. The extra offset `y_offset` is scaled by `s` too.
///
/// Paths are expressed in a road-aligned frame at the ego position.
#[allow(clippy::too_many_arguments)]
pub fn generate_path_set(
    init: &EgoState,
    cap: &CapabilityRecord,
    space: &DriveableSpace,
    fp: &Footprint,
    tuning: &PathTuning,
    side: Side,
    generation_time: f64,
) -> Result<PathSet, PathError> {
    tuning.validate()?;
    let frame = Pose::new(init.x, init.y, 0.0);
    let dt = tuning.dt_presample;

    let max_profile = build_profile(init, cap, tuning, side, cap.rho_max, tuning.psi_max)?;
    let max_path = presample_profile_in(&max_profile, dt, frame);
    let y_max = max_path.terminal().y.abs();

    let x_reach = max_path.samples.iter().map(|s| s.x).fold(0.0, f64::max);
    let half_len = 0.5 * fp.length;
    let raw_extent = space.lateral_extent(
        init.x + fp.ref_offset - half_len,
        init.x + x_reach + fp.ref_offset + half_len,
        init.y,
        side,
    );
    let y_desired = raw_extent - 0.5 * fp.width - tuning.lateral_margin;
    if !(y_desired >= tuning.min_lateral_clearance) {
        return Err(PathError::NoFeasiblePath { y_desired, min_clearance: tuning.min_lateral_clearance });
    }

    let mut scale = if y_max > 0.0 { (y_desired / y_max).min(1.0) } else { 1.0 };
    let mut members = build_members(init, cap, tuning, side, frame, scale);
    for _ in 0..OVERFLOW_ITERATIONS {
        let top = members.iter().map(|m| m.terminal_offset().abs()).fold(0.0, f64::max);
        if top <= y_desired || top == 0.0 {
            break;
        }
        scale *= y_desired / top;
        members = build_members(init, cap, tuning, side, frame, scale);
    }
    members.retain(|m| m.terminal_offset().abs() <= y_desired + 1e-6);
    if members.is_empty() {
        return Err(PathError::EmptyFamily);
    }
    Ok(PathSet { side, generation_time, n_tot: tuning.n_tot, scale, y_desired, y_max, members })
}

fn build_members(
    init: &EgoState,
    cap: &CapabilityRecord,
    tuning: &PathTuning,
    side: Side,
    frame: Pose,
    scale: f64,
) -> Vec<PathMember> {
    // The straight t4→t5 run lasts y_offset / (v·sin ψ4); shrinking the
    // offset with the fit scale keeps it bounded as ψ4 shrinks.
    let tuning = &PathTuning { y_offset: tuning.y_offset * scale.min(1.0), ..*tuning };
    (1..=tuning.n_tot)
        .filter_map(|n| {
            let f = scale * (n as f64 / tuning.n_tot as f64).sqrt();
            let (rho_limit, psi_limit) = (f * cap.rho_max, f * tuning.psi_max);
            if !(psi_limit > 0.0) || heading_headroom(init, cap, tuning, side, psi_limit) <= 0.0 {
                return None;
            }
            let profile = build_profile(init, cap, tuning, side, rho_limit, psi_limit).ok()?;
            let path = presample_profile_in(&profile, tuning.dt_presample, frame);
            Some(PathMember { n, rho_limit, psi_limit, path })
        })
        .collect()
}

/// Re-runs the family generation from the current (mid-manoeuvre) state.
pub fn replan(
    current: &EgoState,
    space: &DriveableSpace,
    fp: &Footprint,
    cap: &CapabilityRecord,
    tuning: &PathTuning,
    side: Side,
    now: f64,
) -> Result<PathSet, PathError> {
    generate_path_set(current, cap, space, fp, tuning, side, now)
}
