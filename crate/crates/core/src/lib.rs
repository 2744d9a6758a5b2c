//! Building blocks for an autonomous evasive steering function: actuation
//! capability, clothoid path families, collision geometry, path ranking,
//! trigger logic and the supervisory state machine, and a mixed
//! steering / differential-braking path-tracking controller together with the
//! single-track plant used to close the loop in simulation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capability;
pub mod control;
pub mod decision;
pub mod geometry;
pub mod model;
pub mod pathgen;
pub mod plant;
pub mod ranking;
pub mod vehicle;

pub use vehicle::{EgoState, ParamError, Pose, VehicleParams, GRAVITY};
