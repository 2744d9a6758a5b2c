//! Footprints, oriented boxes and the staged collision test, plus the
//! driveable-space model used to keep paths on the road.

mod collision;
mod driveable;
mod shapes;
mod target;

pub use collision::{box_clearance, collision_check, first_contact_linear, CollisionReport, FilterStats};
pub use driveable::{driveable_area_check, DriveableSpace, LateralInterval};
pub use shapes::{
    circumscribed_check, inscribed_check, sat_check, sat_check_boxes, CircleVerdict, Footprint,
    OrientedBox,
};
pub use target::{TargetKind, TargetTrack, TimedPose};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("target {id} prediction ends at {end:.3} s, before {t:.3} s")]
    PredictionGap { id: u32, t: f64, end: f64 },
    #[error("position x = {x:.3} m lies outside the driveable-space stations [{start:.3}, {end:.3}]")]
    FrameMismatch { x: f64, start: f64, end: f64 },
    #[error("invalid driveable space: {0}")]
    InvalidSpace(String),
    #[error("invalid footprint: {0}")]
    InvalidFootprint(String),
}
