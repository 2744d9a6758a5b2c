use serde::{Deserialize, Serialize};

use super::shapes::{circumscribed_check, inscribed_check, sat_check_boxes, CircleVerdict, OrientedBox};
use super::{Footprint, TargetTrack};
use crate::pathgen::SampledPath;

/// How many (time step, target) pairs each stage of the check resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    /// Cleared by the circumscribed-circle test.
    pub circumscribed: usize,
    /// Confirmed by the inscribed-circle test.
    pub inscribed: usize,
    /// Left to the separating-axis test.
    pub sat: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDistances {
    pub id: u32,
    /// Contour clearance at each checked time, 0 while overlapping [m].
    pub per_step: Vec<f64>,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub collides: bool,
    pub first_collision_time: Option<f64>,
    pub colliding_target: Option<u32>,
    pub step_times: Vec<f64>,
    pub distances: Vec<TargetDistances>,
    pub filters: FilterStats,
    /// Some target prediction ended before the path; its last pose was used.
    pub prediction_gap: bool,
}

impl CollisionReport {
    pub fn min_distance(&self) -> Option<f64> {
        self.distances.iter().map(|d| d.min).reduce(f64::min)
    }
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (abx, aby) = (b.0 - a.0, b.1 - a.1);
    let len2 = abx * abx + aby * aby;
    let s = if len2 > 0.0 { (((p.0 - a.0) * abx + (p.1 - a.1) * aby) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p.0 - a.0 - s * abx).hypot(p.1 - a.1 - s * aby)
}

/// Euclidean distance between two disjoint boxes (vertex-to-edge minimum).
pub fn box_clearance(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let (ca, cb) = (a.corners(), b.corners());
    let mut d = f64::INFINITY;
    for (from, to) in [(&ca, &cb), (&cb, &ca)] {
        for &p in from.iter() {
            for i in 0..4 {
                d = d.min(point_segment_distance(p, to[i], to[(i + 1) % 4]));
            }
        }
    }
    d
}

/// Checks the footprint swept along `path` against every target at
/// `dt_check` spacing (plus the final sample), using the circumscribed circle,
/// inscribed circle and separating-axis stages in that order. The first
/// contact time is refined by bisection between the last clear step and the
/// first colliding one.
///
/// Path time `t` (relative to the first sample) is matched against target
/// prediction time `t`.
pub fn collision_check(path: &SampledPath, targets: &[TargetTrack], fp: &Footprint, dt_check: f64) -> CollisionReport {
    assert!(dt_check > 0.0, "check spacing must be positive");
    let t_start = path.start_time();
    let duration = path.duration();
    let n = (duration / dt_check + 1e-9).floor() as usize;
    let mut step_times: Vec<f64> = (0..=n).map(|k| k as f64 * dt_check).collect();
    if duration - step_times[n] > 1e-9 {
        step_times.push(duration);
    }

    let mut report = CollisionReport {
        collides: false,
        first_collision_time: None,
        colliding_target: None,
        step_times: step_times.clone(),
        distances: targets
            .iter()
            .map(|t| TargetDistances { id: t.id, per_step: Vec::with_capacity(step_times.len()), min: f64::INFINITY })
            .collect(),
        filters: FilterStats::default(),
        prediction_gap: false,
    };
    if targets.is_empty() {
        return report;
    }

    let mut previous_clear: Option<f64> = None;
    for &t in &step_times {
        let ego_pose = path.world_pose_at(t_start + t);
        let ego_box = fp.obb(&ego_pose);
        let mut hit: Option<u32> = None;
        for (tr, dist) in targets.iter().zip(report.distances.iter_mut()) {
            let (pose, gap) = tr.pose_at_or_last(t);
            report.prediction_gap |= gap;
            let tbox = tr.footprint.obb(&pose);
            let collide = if circumscribed_check(&ego_pose, fp, &pose, &tr.footprint) == CircleVerdict::NoCollision {
                report.filters.circumscribed += 1;
                false
            } else if inscribed_check(&ego_pose, fp, &pose, &tr.footprint) == CircleVerdict::Collision {
                report.filters.inscribed += 1;
                true
            } else {
                report.filters.sat += 1;
                sat_check_boxes(&ego_box, &tbox)
            };
            let d = if collide { 0.0 } else { box_clearance(&ego_box, &tbox) };
            dist.per_step.push(d);
            dist.min = dist.min.min(d);
            if collide && hit.is_none() {
                hit = Some(tr.id);
            }
        }
        match hit {
            Some(id) if !report.collides => {
                report.collides = true;
                report.colliding_target = Some(id);
                report.first_collision_time = Some(match previous_clear {
                    Some(lo) => refine_contact(path, targets, fp, lo, t),
                    None => t,
                });
            }
            None => previous_clear = Some(t),
            _ => {}
        }
    }
    report
}

fn any_overlap(path: &SampledPath, targets: &[TargetTrack], fp: &Footprint, t: f64) -> bool {
    let ego = fp.obb(&path.world_pose_at(path.start_time() + t));
    targets.iter().any(|tr| sat_check_boxes(&ego, &tr.footprint.obb(&tr.pose_at_or_last(t).0)))
}

fn refine_contact(path: &SampledPath, targets: &[TargetTrack], fp: &Footprint, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if any_overlap(path, targets, fp, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Earliest time in `[t_from, t_to]` at which two boxes translating with
/// constant velocities (no rotation) touch; `a` and `b` are the boxes at
/// `t_from`. Exact: overlap on each separating axis is an interval in time.
pub fn first_contact_linear(
    a: &OrientedBox,
    va: (f64, f64),
    b: &OrientedBox,
    vb: (f64, f64),
    t_from: f64,
    t_to: f64,
) -> Option<f64> {
    let d0 = (b.cx - a.cx, b.cy - a.cy);
    let w = (vb.0 - va.0, vb.1 - va.1);
    let (mut lo, mut hi) = (0.0f64, t_to - t_from);
    for n in a.axes().into_iter().chain(b.axes()) {
        let p0 = d0.0 * n.0 + d0.1 * n.1;
        let pv = w.0 * n.0 + w.1 * n.1;
        let r = a.projected_radius(n) + b.projected_radius(n);
        if pv == 0.0 {
            if p0.abs() > r {
                return None;
            }
            continue;
        }
        let (t1, t2) = ((-r - p0) / pv, (r - p0) / pv);
        lo = lo.max(t1.min(t2));
        hi = hi.min(t1.max(t2));
        if lo > hi {
            return None;
        }
    }
    Some(t_from + lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{TargetKind, TargetTrack};
    use crate::vehicle::{EgoState, Pose};

    fn car() -> Footprint {
        Footprint::new(4.5, 1.8, 0.0).unwrap()
    }

    fn static_box(x: f64, y: f64) -> TargetTrack {
        TargetTrack::constant_velocity(7, TargetKind::Static, Footprint::new(1.0, 1.0, 0.0).unwrap(), Pose::new(x, y, 0.0), (0.0, 0.0), 5.0, 0.1)
    }

    #[test]
    fn no_targets() {
        let p = SampledPath::straight(&EgoState::new(0.0, 0.0, 0.0, 20.0), 3.0, 0.01);
        let r = collision_check(&p, &[], &car(), 0.1);
        assert!(!r.collides && r.first_collision_time.is_none() && r.distances.is_empty());
    }

    #[test]
    fn static_target_contact_time() {
        let p = SampledPath::straight(&EgoState::new(0.0, 0.0, 0.0, 20.0), 3.0, 0.01);
        let r = collision_check(&p, &[static_box(20.0, 0.0)], &car(), 0.1);
        // front bumper at x = 2.25 + 20 t meets the box face at 19.5
        let expect = (19.5 - 2.25) / 20.0;
        assert!(r.collides);
        assert!((r.first_collision_time.unwrap() - expect).abs() < 1e-6, "{:?}", r.first_collision_time);
        assert_eq!(r.distances[0].min, 0.0);
        assert_eq!(r.colliding_target, Some(7));
        let s = r.filters;
        assert_eq!(s.circumscribed + s.inscribed + s.sat, r.step_times.len());
    }

    #[test]
    fn clear_target_reports_clearance() {
        let p = SampledPath::straight(&EgoState::new(0.0, 0.0, 0.0, 20.0), 3.0, 0.01);
        let r = collision_check(&p, &[static_box(20.0, 3.0)], &car(), 0.1);
        assert!(!r.collides);
        // lateral gap between y = 0.9 and the box edge at 2.5
        assert!((r.distances[0].min - 1.6).abs() < 1e-9);
    }

    #[test]
    fn linear_contact_of_points() {
        let z = Footprint::new(0.0, 0.0, 0.0).unwrap();
        let a = z.obb(&Pose::default());
        let b = z.obb(&Pose::new(20.0, 0.0, 0.0));
        assert_eq!(first_contact_linear(&a, (20.0, 0.0), &b, (0.0, 0.0), 0.0, 5.0), Some(1.0));
        let c = z.obb(&Pose::new(20.0, 0.5, 0.0));
        assert_eq!(first_contact_linear(&a, (20.0, 0.0), &c, (0.0, 0.0), 0.0, 5.0), None);
    }
}
