//! Path rejection (driveable area, then collisions), cost ranking, selection
//! and monitoring of the active path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{collision_check, driveable_area_check, DriveableSpace, Footprint, TargetTrack};
use crate::pathgen::{PathSet, SampledPath, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostWeights {
    pub k_ay: f64,
    pub k_ax: f64,
    pub k_prox: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { k_ay: 1.0, k_ax: 1.0, k_prox: 0.0 }
    }
}

impl CostWeights {
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { k_ay: self.k_ay * lambda, k_ax: self.k_ax * lambda, k_prox: self.k_prox * lambda }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankingError {
    #[error("samples {index} and {} share the time stamp {t}", index - 1)]
    DegenerateGrid { index: usize, t: f64 },
    #[error("path has fewer than two samples")]
    TooShort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    NotDriveable,
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathCost {
    pub total: f64,
    pub severity: f64,
    pub proximity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPath {
    pub side: Side,
    /// Family index within the side's path set.
    pub n: usize,
    pub path: SampledPath,
    pub rejected: Option<Rejection>,
    pub cost: Option<PathCost>,
    pub first_collision_time: Option<f64>,
    /// Smallest contour clearance to any target over the checked grid [m].
    pub min_clearance: Option<f64>,
}

/// `K_ay·‖v²ρ‖₂ + K_ax·‖Δv/Δt‖₂` over the path samples.
pub fn severity_cost(path: &SampledPath, w: &CostWeights) -> Result<f64, RankingError> {
    let s = &path.samples;
    if s.len() < 2 {
        return Err(RankingError::TooShort);
    }
    let lat: f64 = s.iter().map(|p| (p.v_x * p.v_x * p.rho).powi(2)).sum();
    let mut lon = 0.0;
    for i in 1..s.len() {
        let dt = s[i].t - s[i - 1].t;
        if dt == 0.0 {
            return Err(RankingError::DegenerateGrid { index: i, t: s[i].t });
        }
        lon += ((s[i].v_x - s[i - 1].v_x) / dt).powi(2);
    }
    Ok(w.k_ay * lat.sqrt() + w.k_ax * lon.sqrt())
}

/// `K_prox` times the mean, over path samples, of the centre distance to the
/// nearest target. Returns the cost and whether a prediction ran out.
pub fn proximity_cost(path: &SampledPath, targets: &[TargetTrack], fp: &Footprint, w: &CostWeights) -> (f64, bool) {
    if targets.is_empty() || path.is_empty() {
        return (0.0, false);
    }
    let t0 = path.start_time();
    let mut gap = false;
    let mut sum = 0.0;
    for i in 0..path.len() {
        let (ex, ey) = fp.center(&path.world_pose(i));
        let t = path.samples[i].t - t0;
        let mut nearest = f64::INFINITY;
        for tr in targets {
            let (pose, g) = tr.pose_at_or_last(t);
            gap |= g;
            let (tx, ty) = tr.footprint.center(&pose);
            nearest = nearest.min((ex - tx).hypot(ey - ty));
        }
        sum += nearest;
    }
    (w.k_prox * sum / path.len() as f64, gap)
}

/// Tags each member: driveable check first, then the collision check; the
/// survivors are costed. Input order is preserved.
pub fn rank_paths(
    set: &PathSet,
    targets: &[TargetTrack],
    space: &DriveableSpace,
    fp: &Footprint,
    w: &CostWeights,
    dt_check: f64,
) -> Vec<RankedPath> {
    set.members
        .iter()
        .map(|m| {
            let mut ranked = RankedPath {
                side: set.side,
                n: m.n,
                path: m.path.clone(),
                rejected: None,
                cost: None,
                first_collision_time: None,
                min_clearance: None,
            };
            if !driveable_area_check(&m.path, space, fp) {
                ranked.rejected = Some(Rejection::NotDriveable);
                return ranked;
            }
            let report = collision_check(&m.path, targets, fp, dt_check);
            ranked.min_clearance = report.min_distance();
            if report.collides {
                ranked.rejected = Some(Rejection::Collision);
                ranked.first_collision_time = report.first_collision_time;
                return ranked;
            }
            match severity_cost(&m.path, w) {
                Ok(severity) => {
                    let (proximity, _) = proximity_cost(&m.path, targets, fp, w);
                    ranked.cost = Some(PathCost { total: severity + proximity, severity, proximity });
                }
                // a path the cost cannot be evaluated on is never selected
                Err(_) => ranked.rejected = Some(Rejection::NotDriveable),
            }
            ranked
        })
        .collect()
}

/// Index of the best survivor: lowest total cost, then lowest severity, then
/// first in input order.
pub fn best_index(ranked: &[RankedPath]) -> Option<usize> {
    let mut best: Option<(usize, PathCost)> = None;
    for (i, r) in ranked.iter().enumerate() {
        let Some(c) = r.cost else { continue };
        let better = match best {
            None => true,
            Some((_, b)) => c.total < b.total || (c.total == b.total && c.severity < b.severity),
        };
        if better {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i)
}

/// Best survivor resampled to the control grid.
pub fn select_path(ranked: &[RankedPath], dt_fine: f64) -> Option<SampledPath> {
    best_index(ranked).map(|i| ranked[i].path.resample(dt_fine))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Validity {
    Valid,
    Invalid(InvalidReason),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InvalidReason {
    NotDriveable,
    Collision { first_collision_time: f64, target: Option<u32> },
}

impl std::fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InvalidReason::NotDriveable => write!(f, "not-driveable"),
            InvalidReason::Collision { first_collision_time, target } => match target {
                Some(id) => write!(f, "collision(target {id} at +{first_collision_time:.3}s)"),
                None => write!(f, "collision(at +{first_collision_time:.3}s)"),
            },
        }
    }
}

/// Re-checks the remaining part of the active path against the latest world
/// model. `remaining` must start at the current time, matching target
/// prediction time zero.
pub fn monitor_selected(
    remaining: &SampledPath,
    targets: &[TargetTrack],
    space: &DriveableSpace,
    fp: &Footprint,
    dt_check: f64,
) -> Validity {
    if !driveable_area_check(remaining, space, fp) {
        return Validity::Invalid(InvalidReason::NotDriveable);
    }
    let report = collision_check(remaining, targets, fp, dt_check);
    match report.first_collision_time {
        Some(t) => Validity::Invalid(InvalidReason::Collision { first_collision_time: t, target: report.colliding_target }),
        None => Validity::Valid,
    }
}
