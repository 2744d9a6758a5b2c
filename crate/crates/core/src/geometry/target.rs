use serde::{Deserialize, Serialize};

use super::{Footprint, GeometryError};
use crate::vehicle::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Vru,
    Vehicle,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedPose {
    pub t: f64,
    pub pose: Pose,
}

/// A dynamic object with its predicted motion on a time grid (world frame,
/// times relative to the prediction instant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTrack {
    pub id: u32,
    pub kind: TargetKind,
    pub footprint: Footprint,
    pub predicted: Vec<TimedPose>,
}

impl TargetTrack {
    /// Constant velocity and heading prediction from `pose` over `[0, horizon]`.
    pub fn constant_velocity(
        id: u32,
        kind: TargetKind,
        footprint: Footprint,
        pose: Pose,
        velocity: (f64, f64),
        horizon: f64,
        dt: f64,
    ) -> Self {
        let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
        let predicted = (0..=steps)
            .map(|k| {
                let t = k as f64 * dt;
                TimedPose { t, pose: Pose::new(pose.x + velocity.0 * t, pose.y + velocity.1 * t, pose.psi) }
            })
            .collect();
        Self { id, kind, footprint, predicted }
    }

    pub fn horizon(&self) -> f64 {
        self.predicted.last().map_or(0.0, |p| p.t)
    }

    /// Linear interpolation on the prediction grid.
    pub fn pose_at(&self, t: f64) -> Result<Pose, GeometryError> {
        let first = self.predicted.first().ok_or(GeometryError::PredictionGap { id: self.id, t, end: 0.0 })?;
        let end = self.horizon();
        if t > end + 1e-9 {
            return Err(GeometryError::PredictionGap { id: self.id, t, end });
        }
        if t <= first.t || self.predicted.len() == 1 {
            return Ok(first.pose);
        }
        let i = self.predicted.partition_point(|p| p.t <= t).clamp(1, self.predicted.len() - 1);
        let (p, q) = (&self.predicted[i - 1], &self.predicted[i]);
        if t >= q.t {
            return Ok(q.pose);
        }
        let s = (t - p.t) / (q.t - p.t);
        Ok(Pose::new(
            p.pose.x + s * (q.pose.x - p.pose.x),
            p.pose.y + s * (q.pose.y - p.pose.y),
            p.pose.psi + s * (q.pose.psi - p.pose.psi),
        ))
    }

    /// Pose at `t`, falling back to the last predicted pose past the horizon.
    pub fn pose_at_or_last(&self, t: f64) -> (Pose, bool) {
        match self.pose_at(t) {
            Ok(p) => (p, false),
            Err(_) => (self.predicted.last().map_or(Pose::default(), |p| p.pose), true),
        }
    }

    /// The same prediction viewed from a time `dt` later.
    pub fn advanced(&self, dt: f64) -> Self {
        let predicted = self
            .predicted
            .iter()
            .filter(|p| p.t >= dt)
            .map(|p| TimedPose { t: p.t - dt, pose: p.pose })
            .collect();
        Self { predicted, ..self.clone() }
    }
}
