use serde::{Deserialize, Serialize};

use crate::geometry::{first_contact_linear, Footprint, TargetTrack};
use crate::pathgen::CurvatureProfile;
use crate::vehicle::EgoState;

fn default_ttc_horizon() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriggerConfig {
    /// Engage window on top of the TTE [s].
    pub t_margin: f64,
    /// Additional warning lead time [s].
    pub t_warning: f64,
    /// Constant subtracted from t8 − t0 to obtain the TTE [s].
    pub tte_reduction: f64,
    #[serde(default = "default_ttc_horizon")]
    pub ttc_horizon: f64,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        Self { t_margin: 0.1, t_warning: 0.5, tte_reduction: 0.0, ttc_horizon: default_ttc_horizon() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trigger {
    None,
    Warn,
    Engage,
}

impl Trigger {
    pub fn as_str(self) -> &'static str {
        match self {
            Trigger::None => "none",
            Trigger::Warn => "warn",
            Trigger::Engage => "engage",
        }
    }
}

/// Time to evade: end of the evasive phase minus the tunable reduction.
pub fn compute_tte(profile: &CurvatureProfile, cfg: &TriggerConfig) -> f64 {
    (profile.evasion_duration() - cfg.tte_reduction).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ttc {
    /// Seconds until first contact on the no-action path; `inf` if none.
    pub value: f64,
    pub target: Option<u32>,
    /// A prediction ended inside the horizon; its last pose was held.
    pub prediction_gap: bool,
}

/// TTC of the no-action motion: the ego keeps its current speed and heading.
///
/// Each target prediction interval is tested in continuous time: after the
/// circumscribed-circle test on the interval's closest approach, the exact
/// first-contact time of the two translating boxes is found from the
/// separating axes.
pub fn compute_ttc(ego: &EgoState, targets: &[TargetTrack], fp: &Footprint, horizon: f64) -> Ttc {
    let (s, c) = ego.psi.sin_cos();
    let ve = (ego.v_x * c, ego.v_x * s);
    let ego_pose_at = |t: f64| {
        let mut p = ego.pose();
        p.x += ve.0 * t;
        p.y += ve.1 * t;
        p
    };
    let mut best = Ttc { value: f64::INFINITY, target: None, prediction_gap: false };
    for tr in targets {
        let mut pieces: Vec<(f64, f64, crate::vehicle::Pose, (f64, f64))> = Vec::new();
        for w in tr.predicted.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            if p.t >= horizon || q.t <= p.t {
                continue;
            }
            let vel = ((q.pose.x - p.pose.x) / (q.t - p.t), (q.pose.y - p.pose.y) / (q.t - p.t));
            pieces.push((p.t, q.t.min(horizon), p.pose, vel));
        }
        let end = tr.horizon();
        if end < horizon {
            best.prediction_gap = true;
            if let Some(last) = tr.predicted.last() {
                pieces.push((end.max(0.0), horizon, last.pose, (0.0, 0.0)));
            }
        }
        let r_sum = fp.circumscribed_radius() + tr.footprint.circumscribed_radius();
        for (t_a, t_b, pose, vel) in pieces {
            if t_a >= best.value {
                break;
            }
            let ea = fp.obb(&ego_pose_at(t_a));
            let tb = tr.footprint.obb(&pose);
            // closest approach of the centres over the interval
            let d0 = (tb.cx - ea.cx, tb.cy - ea.cy);
            let w = (vel.0 - ve.0, vel.1 - ve.1);
            let ww = w.0 * w.0 + w.1 * w.1;
            let tau = if ww > 0.0 { (-(d0.0 * w.0 + d0.1 * w.1) / ww).clamp(0.0, t_b - t_a) } else { 0.0 };
            if (d0.0 + w.0 * tau).hypot(d0.1 + w.1 * tau) > r_sum {
                continue;
            }
            if let Some(t) = first_contact_linear(&ea, ve, &tb, vel, t_a, t_b) {
                if t < best.value {
                    best.value = t;
                    best.target = Some(tr.id);
                }
                break;
            }
        }
    }
    best
}

/// Engage iff TTE ≤ TTC ≤ TTE + t_margin; otherwise warn iff
/// TTC ≤ TTE + t_margin + t_warning.
pub fn evaluate_triggers(ttc: f64, tte: f64, cfg: &TriggerConfig) -> Trigger {
    if tte <= ttc && ttc <= tte + cfg.t_margin {
        Trigger::Engage
    } else if ttc <= tte + cfg.t_margin + cfg.t_warning {
        Trigger::Warn
    } else {
        Trigger::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TargetKind;
    use crate::pathgen::Breakpoint;
    use crate::vehicle::Pose;

    fn cfg() -> TriggerConfig {
        TriggerConfig { t_margin: 0.2, t_warning: 0.3, tte_reduction: 0.3, ttc_horizon: 5.0 }
    }

    #[test]
    fn tte_from_t8() {
        let mut p = CurvatureProfile::constant(0.0, 20.0, 0.0, 2.0);
        p.breakpoints = (0..10).map(|i| Breakpoint { t: if i >= 8 { 1.5 + (i - 8) as f64 * 0.5 } else { i as f64 * 0.1 }, rho: 0.0, v_x: 20.0 }).collect();
        assert!((compute_tte(&p, &cfg()) - 1.2).abs() < 1e-12);
        let big = TriggerConfig { tte_reduction: 2.0, ..cfg() };
        assert_eq!(compute_tte(&p, &big), 0.0);
    }

    #[test]
    fn trigger_windows() {
        assert_eq!(evaluate_triggers(1.3, 1.2, &cfg()), Trigger::Engage);
        assert_eq!(evaluate_triggers(1.6, 1.2, &cfg()), Trigger::Warn);
        assert_eq!(evaluate_triggers(f64::INFINITY, 1.2, &cfg()), Trigger::None);
        // already past the last moment: still warn, never engage
        assert_eq!(evaluate_triggers(1.0, 1.2, &cfg()), Trigger::Warn);
    }

    #[test]
    fn point_target_ttc() {
        let z = Footprint::new(0.0, 0.0, 0.0).unwrap();
        let tr = TargetTrack::constant_velocity(3, TargetKind::Static, z, Pose::new(20.0, 0.0, 0.0), (0.0, 0.0), 5.0, 0.1);
        let ttc = compute_ttc(&EgoState::new(0.0, 0.0, 0.0, 20.0), &[tr], &z, 5.0);
        assert_eq!(ttc.value, 1.0);
        assert_eq!(ttc.target, Some(3));
    }

    #[test]
    fn clear_target_is_infinite() {
        let fp = Footprint::new(4.5, 1.8, 0.0).unwrap();
        let tr = TargetTrack::constant_velocity(1, TargetKind::Static, fp, Pose::new(30.0, 4.0, 0.0), (0.0, 0.0), 5.0, 0.1);
        let ttc = compute_ttc(&EgoState::new(0.0, 0.0, 0.0, 20.0), &[tr], &fp, 5.0);
        assert!(ttc.value.is_infinite() && ttc.target.is_none());
    }

    #[test]
    fn crossing_target_ttc() {
        let car = Footprint::new(4.5, 1.8, 0.0).unwrap();
        let vru = Footprint::new(0.5, 0.5, 0.0).unwrap();
        // walker enters the corridor (y = -0.9 - 0.25) at t = 1.0 while the
        // bumper is still short of it; contact when the bumper reaches x = 29.75
        let tr = TargetTrack::constant_velocity(1, TargetKind::Vru, vru, Pose::new(30.0, -2.15, 0.0), (0.0, 1.0), 5.0, 0.1);
        let ttc = compute_ttc(&EgoState::new(0.0, 0.0, 0.0, 20.0), &[tr], &car, 5.0);
        assert!((ttc.value - (29.75 - 2.25) / 20.0).abs() < 1e-12, "{}", ttc.value);
    }

    #[test]
    fn short_prediction_is_flagged() {
        let fp = Footprint::new(1.0, 1.0, 0.0).unwrap();
        let tr = TargetTrack::constant_velocity(1, TargetKind::Static, fp, Pose::new(60.0, 0.0, 0.0), (0.0, 0.0), 1.0, 0.1);
        let ttc = compute_ttc(&EgoState::new(0.0, 0.0, 0.0, 20.0), &[tr], &fp, 5.0);
        assert!(ttc.prediction_gap);
        assert!((ttc.value - 59.0 / 20.0).abs() < 1e-12);
    }
}
