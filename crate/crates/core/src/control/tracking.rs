use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::pathgen::{PathSample, SampledPath};
use crate::plant::PlantState;
use crate::vehicle::{wrap_angle, Pose};

/// Path-minus-vehicle errors at the match point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackingErrors {
    pub y_e: f64,
    pub y_e_dot: f64,
    pub psi_e: f64,
    pub psi_e_dot: f64,
    pub kappa: f64,
    pub kappa_dot: f64,
    /// Path time of the match point.
    pub t_match: f64,
}

/// Re-expresses `path` relative to the vehicle pose `ego` (given in the
/// path's own coordinates).
pub fn path_to_vehicle_frame(path: &SampledPath, ego: &Pose) -> SampledPath {
    let samples = path
        .samples
        .iter()
        .map(|s| {
            let p = ego.relative(&s.pose());
            PathSample { x: p.x, y: p.y, psi: p.psi, ..*s }
        })
        .collect();
    SampledPath { samples, dt: path.dt, frame: path.frame.compose(ego), profile: path.profile.clone() }
}

/// Errors against a path already expressed in the vehicle frame. The match
/// point is where the path crosses the vehicle's lateral axis (local x = 0).
/// ẏ_e and ψ̇_e follow from `v = u ψ_e − ẏ_e` and `r = u κ − ψ̇_e`.
pub fn tracking_errors(local: &SampledPath, plant: &PlantState) -> Result<TrackingErrors, ControlError> {
    let s = &local.samples;
    if s.is_empty() {
        return Err(ControlError::EmptyPath);
    }
    let n = s.len();
    let (i, f) = if s[0].x >= 0.0 {
        (0, 0.0)
    } else {
        match s.windows(2).position(|w| w[1].x >= 0.0) {
            Some(i) if i + 1 < n - 1 || s[n - 1].x > 0.0 => (i, -s[i].x / (s[i + 1].x - s[i].x)),
            _ => return Err(ControlError::PathExhausted { t: s[n - 1].t }),
        }
    };
    let j = (i + 1).min(n - 1);
    let lerp = |a: f64, b: f64| a + f * (b - a);
    let (p, q) = (&s[i], &s[j]);
    // A sample's heading is the direction of the chord arriving at it, so the
    // tangent at vertex k is the mean of the chords on either side.
    let tangent = |k: usize| 0.5 * (s[k].psi + s[(k + 1).min(n - 1)].psi);
    let psi_e = wrap_angle(lerp(tangent(i), tangent(j)));
    let kappa = lerp(p.rho, q.rho);
    let kappa_dot = if j > i { (q.rho - p.rho) / (q.t - p.t) } else { 0.0 };
    let u = plant.u;
    Ok(TrackingErrors {
        y_e: lerp(p.y, q.y),
        y_e_dot: u * psi_e - plant.v,
        psi_e,
        psi_e_dot: u * kappa - plant.r,
        kappa,
        kappa_dot,
        t_match: lerp(p.t, q.t),
    })
}
