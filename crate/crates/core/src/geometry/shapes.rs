use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::vehicle::Pose;

/// Rectangular footprint. `ref_offset` is the distance from the pose
/// reference point (e.g. rear axle) forward to the geometric centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
    #[serde(default)]
    pub ref_offset: f64,
}

impl Footprint {
    pub fn new(length: f64, width: f64, ref_offset: f64) -> Result<Self, GeometryError> {
        let fp = Self { length, width, ref_offset };
        fp.validate()?;
        Ok(fp)
    }

    /// Zero sizes are accepted so point-like objects can be represented.
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.length >= 0.0 && self.width >= 0.0 && self.length.is_finite() && self.width.is_finite())
            || !self.ref_offset.is_finite()
        {
            return Err(GeometryError::InvalidFootprint(format!(
                "length {} / width {} must be finite and non-negative",
                self.length, self.width
            )));
        }
        Ok(())
    }

    pub fn circumscribed_radius(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }

    pub fn inscribed_radius(&self) -> f64 {
        0.5 * self.length.min(self.width)
    }

    pub fn center(&self, pose: &Pose) -> (f64, f64) {
        pose.apply(self.ref_offset, 0.0)
    }

    pub fn obb(&self, pose: &Pose) -> OrientedBox {
        let (cx, cy) = self.center(pose);
        OrientedBox { cx, cy, psi: pose.psi, half_length: 0.5 * self.length, half_width: 0.5 * self.width }
    }

    /// Corners in world coordinates: front-left, front-right, rear-right, rear-left.
    pub fn corners(&self, pose: &Pose) -> [(f64, f64); 4] {
        self.obb(pose).corners()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub cx: f64,
    pub cy: f64,
    pub psi: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl OrientedBox {
    /// Unit axes along the length and the width.
    pub fn axes(&self) -> [(f64, f64); 2] {
        let (s, c) = self.psi.sin_cos();
        [(c, s), (-s, c)]
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        let [(ux, uy), (vx, vy)] = self.axes();
        let (l, w) = (self.half_length, self.half_width);
        let at = |a: f64, b: f64| (self.cx + a * ux + b * vx, self.cy + a * uy + b * vy);
        [at(l, w), at(l, -w), at(-l, -w), at(-l, w)]
    }

    /// Half extent of the box projected on unit axis `n`.
    pub fn projected_radius(&self, n: (f64, f64)) -> f64 {
        let [u, v] = self.axes();
        self.half_length * (u.0 * n.0 + u.1 * n.1).abs() + self.half_width * (v.0 * n.0 + v.1 * n.1).abs()
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        let [u, v] = self.axes();
        let (dx, dy) = (px - self.cx, py - self.cy);
        (dx * u.0 + dy * u.1).abs() <= self.half_length && (dx * v.0 + dy * v.1).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleVerdict {
    NoCollision,
    Collision,
    Unknown,
}

fn center_distance(pa: &Pose, fa: &Footprint, pb: &Pose, fb: &Footprint) -> f64 {
    let (ax, ay) = fa.center(pa);
    let (bx, by) = fb.center(pb);
    (ax - bx).hypot(ay - by)
}

/// `NoCollision` when the circumscribed circles are strictly apart.
pub fn circumscribed_check(pa: &Pose, fa: &Footprint, pb: &Pose, fb: &Footprint) -> CircleVerdict {
    if center_distance(pa, fa, pb, fb) > fa.circumscribed_radius() + fb.circumscribed_radius() {
        CircleVerdict::NoCollision
    } else {
        CircleVerdict::Unknown
    }
}

/// `Collision` when the inscribed circles strictly overlap.
pub fn inscribed_check(pa: &Pose, fa: &Footprint, pb: &Pose, fb: &Footprint) -> CircleVerdict {
    if center_distance(pa, fa, pb, fb) < fa.inscribed_radius() + fb.inscribed_radius() {
        CircleVerdict::Collision
    } else {
        CircleVerdict::Unknown
    }
}

/// Separating-axis test; touching boxes count as colliding.
pub fn sat_check(pa: &Pose, fa: &Footprint, pb: &Pose, fb: &Footprint) -> bool {
    sat_check_boxes(&fa.obb(pa), &fb.obb(pb))
}

pub fn sat_check_boxes(a: &OrientedBox, b: &OrientedBox) -> bool {
    let d = (b.cx - a.cx, b.cy - a.cy);
    a.axes().into_iter().chain(b.axes()).all(|n| {
        let gap = (d.0 * n.0 + d.1 * n.1).abs();
        gap <= a.projected_radius(n) + b.projected_radius(n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn fp(l: f64, w: f64) -> Footprint {
        Footprint::new(l, w, 0.0).unwrap()
    }

    #[test]
    fn radii() {
        let f = fp(4.5, 1.8);
        assert!((f.circumscribed_radius() - 0.5 * (4.5f64 * 4.5 + 1.8 * 1.8).sqrt()).abs() < 1e-15);
        assert_eq!(f.inscribed_radius(), 0.9);
        assert!(Footprint::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn circumscribed_cases() {
        // radii 2.5 and 1.0
        let a = fp(4.0, 3.0);
        let b = fp(2.0f64.sqrt(), 2.0f64.sqrt());
        let o = Pose::default();
        assert_eq!(circumscribed_check(&o, &a, &Pose::new(10.0, 0.0, 0.0), &b), CircleVerdict::NoCollision);
        assert_eq!(circumscribed_check(&o, &a, &o, &b), CircleVerdict::Unknown);
        assert_eq!(circumscribed_check(&o, &a, &Pose::new(3.49, 0.0, 0.0), &b), CircleVerdict::Unknown);
    }

    #[test]
    fn inscribed_cases() {
        let a = fp(4.5, 1.8);
        let o = Pose::default();
        assert_eq!(inscribed_check(&o, &a, &o, &a), CircleVerdict::Collision);
        assert_eq!(inscribed_check(&o, &a, &Pose::new(1.5, 0.0, 0.0), &a), CircleVerdict::Collision);
        let b = fp(2.0, 2.0);
        // exactly r_a + r_b = 0.9 + 1.0 apart
        assert_eq!(inscribed_check(&o, &a, &Pose::new(0.0, 1.9, 0.0), &b), CircleVerdict::Unknown);
    }

    #[test]
    fn sat_cases() {
        let a = fp(2.0, 1.0);
        let o = Pose::default();
        assert!(!sat_check(&o, &a, &Pose::new(5.0, 0.0, 0.0), &a));
        assert!(sat_check(&o, &a, &o, &a));
        // touching edges collide
        assert!(sat_check(&o, &a, &Pose::new(2.0, 0.0, 0.0), &a));
        assert!(!sat_check(&o, &a, &Pose::new(2.0 + 1e-12, 0.0, 0.0), &a));
    }

    #[test]
    fn sat_rotated_small_box() {
        let car = fp(4.5, 1.8);
        let vru = fp(0.5, 0.5);
        let o = Pose::default();
        let p = Pose::new(2.6, 0.6, FRAC_PI_4);
        // the diamond's nearest corner sits at x = 2.6 − 0.3536 < 2.25 → overlap
        assert!(sat_check(&o, &car, &p, &vru));
        assert!(!sat_check(&o, &car, &Pose::new(2.65, 1.3, FRAC_PI_4), &vru));
    }

    #[test]
    fn ref_offset_moves_center() {
        let f = Footprint::new(4.0, 2.0, 1.5).unwrap();
        let (cx, cy) = f.center(&Pose::new(1.0, 1.0, std::f64::consts::FRAC_PI_2));
        assert!((cx - 1.0).abs() < 1e-12 && (cy - 2.5).abs() < 1e-12);
    }
}
