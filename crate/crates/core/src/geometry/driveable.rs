use serde::{Deserialize, Serialize};

use super::{Footprint, GeometryError};
use crate::pathgen::{SampledPath, Side};

/// One lateral piece of road at a station, `right < left` (y positive left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateralInterval {
    pub right: f64,
    pub left: f64,
}

impl LateralInterval {
    pub fn new(right: f64, left: f64) -> Self {
        Self { right, left }
    }

    pub fn contains(&self, y: f64) -> bool {
        self.right <= y && y <= self.left
    }
}

/// Driveable lateral intervals at evenly spaced longitudinal stations of a
/// road-aligned frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveableSpace {
    x_start: f64,
    spacing: f64,
    stations: Vec<Vec<LateralInterval>>,
    granularity: f64,
}

impl DriveableSpace {
    pub const DEFAULT_GRANULARITY: f64 = 0.5;

    pub fn new(x_start: f64, spacing: f64, stations: Vec<Vec<LateralInterval>>) -> Result<Self, GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidSpace(m));
        if !(spacing > 0.0 && spacing.is_finite() && x_start.is_finite()) {
            return bad(format!("station spacing {spacing} must be positive"));
        }
        if stations.len() < 2 {
            return bad("at least two stations are required".into());
        }
        for (k, ivs) in stations.iter().enumerate() {
            for iv in ivs {
                if !(iv.left > iv.right) || !iv.left.is_finite() || !iv.right.is_finite() {
                    return bad(format!("station {k}: interval [{}, {}] is empty", iv.right, iv.left));
                }
            }
            if ivs.windows(2).any(|w| w[1].right <= w[0].left) {
                return bad(format!("station {k}: intervals must be sorted and disjoint"));
            }
        }
        Ok(Self { x_start, spacing, stations, granularity: Self::DEFAULT_GRANULARITY })
    }

    /// A straight corridor `[right, left]` over `[x_start, x_start + length]`.
    pub fn uniform(x_start: f64, length: f64, spacing: f64, right: f64, left: f64) -> Result<Self, GeometryError> {
        Self::from_fn(x_start, length, spacing, |_| vec![LateralInterval::new(right, left)])
    }

    /// Samples `f(x)` at every station.
    pub fn from_fn(
        x_start: f64,
        length: f64,
        spacing: f64,
        f: impl Fn(f64) -> Vec<LateralInterval>,
    ) -> Result<Self, GeometryError> {
        let n = (length / spacing - 1e-9).ceil().max(1.0) as usize + 1;
        let stations = (0..n).map(|k| f(x_start + k as f64 * spacing)).collect();
        Self::new(x_start, spacing, stations)
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn x_end(&self) -> f64 {
        self.x_start + (self.stations.len() - 1) as f64 * self.spacing
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn stations(&self) -> &[Vec<LateralInterval>] {
        &self.stations
    }

    pub fn station_x(&self, k: usize) -> f64 {
        self.x_start + k as f64 * self.spacing
    }

    /// Intervals at station `k`, cut into pieces no wider than the lateral
    /// granularity (for display and coarse occupancy queries).
    pub fn segments(&self, k: usize) -> Vec<LateralInterval> {
        let mut out = Vec::new();
        for iv in &self.stations[k] {
            let n = ((iv.left - iv.right) / self.granularity - 1e-9).ceil().max(1.0) as usize;
            let w = (iv.left - iv.right) / n as f64;
            out.extend((0..n).map(|i| {
                LateralInterval::new(iv.right + i as f64 * w, if i + 1 == n { iv.left } else { iv.right + (i + 1) as f64 * w })
            }));
        }
        out
    }

    /// Copy with every station's intervals replaced by `f(x, intervals)`.
    pub fn map_stations(&self, f: impl Fn(f64, &[LateralInterval]) -> Vec<LateralInterval>) -> Result<Self, GeometryError> {
        let stations = self.stations.iter().enumerate().map(|(k, ivs)| f(self.station_x(k), ivs)).collect();
        Self::new(self.x_start, self.spacing, stations)
    }

    fn bracket(&self, x: f64) -> Result<(usize, f64), GeometryError> {
        if !(x >= self.x_start && x <= self.x_end()) {
            return Err(GeometryError::FrameMismatch { x, start: self.x_start, end: self.x_end() });
        }
        let f = (x - self.x_start) / self.spacing;
        let k = (f.floor() as usize).min(self.stations.len() - 2);
        Ok((k, f - k as f64))
    }

    /// Whether `(x, y)` is driveable. Bounds are interpolated linearly between
    /// stations with matching interval structure; otherwise the point must be
    /// inside an interval at both neighbouring stations.
    pub fn contains(&self, x: f64, y: f64) -> Result<bool, GeometryError> {
        let (k, s) = self.bracket(x)?;
        let (a, b) = (&self.stations[k], &self.stations[k + 1]);
        if a.len() == b.len() {
            Ok(a.iter().zip(b).any(|(p, q)| {
                let r = p.right + s * (q.right - p.right);
                let l = p.left + s * (q.left - p.left);
                r <= y && y <= l
            }))
        } else {
            Ok(a.iter().any(|iv| iv.contains(y)) && b.iter().any(|iv| iv.contains(y)))
        }
    }

    /// Smallest distance from `y` to the boundary on `side` over all stations
    /// in `[x_from, x_to]`, staying in the interval that contains `y`. Zero if
    /// `y` is not driveable at some station or the range leaves the stations.
    pub fn lateral_extent(&self, x_from: f64, x_to: f64, y: f64, side: Side) -> f64 {
        if x_from < self.x_start || x_to > self.x_end() {
            return 0.0;
        }
        let k0 = ((x_from - self.x_start) / self.spacing).floor().max(0.0) as usize;
        let k1 = (((x_to - self.x_start) / self.spacing).ceil() as usize).min(self.stations.len() - 1);
        let mut extent = f64::INFINITY;
        for ivs in &self.stations[k0..=k1] {
            let Some(iv) = ivs.iter().find(|iv| iv.contains(y)) else {
                return 0.0;
            };
            let d = match side {
                Side::Left => iv.left - y,
                Side::Right => y - iv.right,
            };
            extent = extent.min(d);
        }
        extent.max(0.0)
    }
}

/// True iff every footprint corner at every path sample is driveable.
pub fn driveable_area_check(path: &SampledPath, space: &DriveableSpace, fp: &Footprint) -> bool {
    (0..path.len()).all(|i| {
        fp.corners(&path.world_pose(i))
            .iter()
            .all(|&(x, y)| space.contains(x, y).unwrap_or(false))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathgen::{presample_profile_in, CurvatureProfile};
    use crate::vehicle::Pose;

    fn lane() -> DriveableSpace {
        DriveableSpace::uniform(-10.0, 200.0, 1.0, -1.625, 1.625).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(DriveableSpace::new(0.0, 1.0, vec![vec![LateralInterval::new(1.0, 0.0)]; 3]).is_err());
        assert!(DriveableSpace::new(0.0, 0.0, vec![vec![]; 3]).is_err());
        let overlapping = vec![LateralInterval::new(0.0, 2.0), LateralInterval::new(1.0, 3.0)];
        assert!(DriveableSpace::new(0.0, 1.0, vec![overlapping; 2]).is_err());
    }

    #[test]
    fn segments_respect_granularity() {
        let s = lane();
        let seg = s.segments(0);
        assert_eq!(seg.len(), 7);
        assert!(seg.iter().all(|iv| iv.left - iv.right <= 0.5 + 1e-12));
        assert_eq!(seg[0].right, -1.625);
        assert_eq!(seg[6].left, 1.625);
    }

    #[test]
    fn centred_straight_path_is_driveable() {
        let fp = Footprint::new(4.5, 1.8, 0.0).unwrap();
        let p = presample_profile_in(&CurvatureProfile::constant(0.0, 20.0, 0.0, 3.0), 0.01, Pose::default());
        assert!(driveable_area_check(&p, &lane(), &fp));
        let shifted = presample_profile_in(&CurvatureProfile::constant(0.0, 20.0, 0.0, 3.0), 0.01, Pose::new(0.0, 2.0, 0.0));
        assert!(!driveable_area_check(&shifted, &lane(), &fp));
    }

    #[test]
    fn leaving_the_stations_is_not_driveable() {
        let fp = Footprint::new(4.5, 1.8, 0.0).unwrap();
        let p = presample_profile_in(&CurvatureProfile::constant(0.0, 20.0, 0.0, 20.0), 0.1, Pose::default());
        assert!(!driveable_area_check(&p, &lane(), &fp));
        assert!(matches!(lane().contains(500.0, 0.0), Err(GeometryError::FrameMismatch { .. })));
    }

    #[test]
    fn interpolated_taper() {
        let s = DriveableSpace::new(
            0.0,
            1.0,
            vec![vec![LateralInterval::new(0.0, 4.0)], vec![LateralInterval::new(0.0, 2.0)]],
        )
        .unwrap();
        assert!(s.contains(0.5, 2.9).unwrap());
        assert!(!s.contains(0.5, 3.1).unwrap());
    }

    #[test]
    fn lateral_extent_takes_minimum() {
        let s = DriveableSpace::from_fn(0.0, 50.0, 1.0, |x| {
            vec![LateralInterval::new(-5.0, if x > 20.0 { 1.0 } else { 3.0 })]
        })
        .unwrap();
        assert_eq!(s.lateral_extent(0.0, 10.0, 0.0, Side::Left), 3.0);
        assert_eq!(s.lateral_extent(0.0, 30.0, 0.0, Side::Left), 1.0);
        assert_eq!(s.lateral_extent(0.0, 30.0, 0.0, Side::Right), 5.0);
        assert_eq!(s.lateral_extent(0.0, 60.0, 0.0, Side::Right), 0.0);
    }
}
