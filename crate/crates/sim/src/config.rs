//! Scenario files: a single TOML document with an explicit schema version.

use std::path::Path;

use aes_core::capability::{CapabilityScenario, CapabilityTuning};
use aes_core::control::ControllerConfig;
use aes_core::decision::TriggerConfig;
use aes_core::geometry::{DriveableSpace, Footprint, LateralInterval, TargetKind};
use aes_core::pathgen::{PathTuning, Side};
use aes_core::ranking::CostWeights;
use aes_core::{EgoState, VehicleParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    Schema { found: u32 },
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown parameter {0}")]
    UnknownParameter(String),
}

fn invalid(field: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), reason: reason.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub vehicle: VehicleParams,
    pub footprint: Footprint,
    pub road: RoadConfig,
    pub ego: EgoState,
    #[serde(default)]
    pub targets: Vec<TargetConfig>,
    pub planner: PlannerConfig,
    pub trigger: TriggerConfig,
    pub controller: ControllerConfig,
    pub sim: SimConfig,
}

/// Straight road along +x with a uniform cross-section and optional
/// per-range replacements (lane closures, tapers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadConfig {
    pub x_start: f64,
    pub length: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    pub right: f64,
    pub left: f64,
    #[serde(default)]
    pub sections: Vec<RoadSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadSection {
    pub x_from: f64,
    pub x_to: f64,
    pub right: f64,
    pub left: f64,
}

fn default_spacing() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub id: u32,
    pub kind: TargetKind,
    pub length: f64,
    pub width: f64,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub psi: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
    /// The target is withheld from the pipeline before this time [s].
    #[serde(default)]
    pub appear_time: f64,
    /// Velocity change some time after the intervention starts.
    #[serde(default)]
    pub after_engage: Option<VelocityChange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityChange {
    pub delay: f64,
    pub vx: f64,
    pub vy: f64,
}

fn default_sides() -> Vec<Side> {
    vec![Side::Right, Side::Left]
}
fn default_cycle() -> f64 {
    0.1
}
fn default_dt_check() -> f64 {
    0.05
}
fn default_horizon() -> f64 {
    6.0
}
fn default_prediction_dt() -> f64 {
    0.05
}
fn default_range() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    /// Actuation scenario id (1–6).
    pub scenario: CapabilityScenario,
    #[serde(default = "default_sides")]
    pub sides: Vec<Side>,
    /// Planner cycle [s].
    #[serde(default = "default_cycle")]
    pub dt_cycle: f64,
    /// Collision-check spacing [s].
    #[serde(default = "default_dt_check")]
    pub dt_check: f64,
    #[serde(default = "default_horizon")]
    pub prediction_horizon: f64,
    #[serde(default = "default_prediction_dt")]
    pub prediction_dt: f64,
    /// Targets further ahead than this are out of range [m].
    #[serde(default = "default_range")]
    pub perception_range: f64,
    pub capability: CapabilityTuning,
    pub path: PathTuning,
    pub cost: CostWeights,
}

fn default_duration() -> f64 {
    8.0
}
fn default_dt_plant() -> f64 {
    0.001
}
fn default_dt_supervisor() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_dt_plant")]
    pub dt_plant: f64,
    #[serde(default = "default_dt_supervisor")]
    pub dt_supervisor: f64,
    #[serde(default)]
    pub seed: u64,
    /// Standard deviation of the measured target position [m].
    #[serde(default)]
    pub position_noise: f64,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let value: toml::Value = text.parse()?;
        Self::from_value(value)
    }

    pub fn from_value(value: toml::Value) -> Result<Self, ConfigError> {
        let found = value.get("schema_version").and_then(|v| v.as_integer()).unwrap_or(0);
        if found != SCHEMA_VERSION as i64 {
            return Err(ConfigError::Schema { found: found.max(0) as u32 });
        }
        let cfg: ScenarioConfig = value.try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.vehicle.validate().map_err(|e| invalid("vehicle", e))?;
        self.footprint.validate().map_err(|e| invalid("footprint", e))?;
        if !(self.footprint.length > 0.0 && self.footprint.width > 0.0) {
            return Err(invalid("footprint", "ego footprint needs a positive size"));
        }
        self.planner.path.validate().map_err(|e| invalid("planner.path", e))?;
        self.controller.validate().map_err(|e| invalid("controller", e))?;
        if self.ego.v_x.is_nan() || self.ego.v_x <= 0.0 {
            return Err(invalid("ego.v_x", "must be positive"));
        }
        let pb = self.planner.scenario.prebraking();
        let (t_cap, t_path) = (self.planner.capability.t_pb, self.planner.path.t_pb);
        if pb && t_cap != t_path {
            return Err(invalid("planner.path.t_pb", format!("must equal planner.capability.t_pb ({t_cap})")));
        }
        if !pb && t_path != 0.0 {
            return Err(invalid("planner.path.t_pb", "must be 0 for an actuation scenario without pre-braking"));
        }
        if self.planner.sides.is_empty() {
            return Err(invalid("planner.sides", "at least one side is required"));
        }
        let t = &self.trigger;
        if !(t.t_margin >= 0.0 && t.t_warning >= 0.0 && t.tte_reduction >= 0.0 && t.ttc_horizon > 0.0) {
            return Err(invalid("trigger", "times must be non-negative"));
        }
        let s = &self.sim;
        if !(s.dt_plant > 0.0 && s.dt_plant <= 0.01) {
            return Err(invalid("sim.dt_plant", "must lie in (0, 0.01]"));
        }
        for (name, dt) in [
            ("sim.dt_supervisor", s.dt_supervisor),
            ("controller.dt_control", self.controller.dt_control),
            ("planner.dt_cycle", self.planner.dt_cycle),
        ] {
            let ratio = dt / s.dt_plant;
            if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9) {
                return Err(invalid(name, "must be a whole multiple of sim.dt_plant"));
            }
        }
        if !(s.duration > 0.0 && s.position_noise >= 0.0) {
            return Err(invalid("sim", "duration must be positive and noise non-negative"));
        }
        if !(self.planner.dt_check > 0.0 && self.planner.prediction_dt > 0.0 && self.planner.prediction_horizon > 0.0) {
            return Err(invalid("planner", "check spacing and prediction grid must be positive"));
        }
        let mut ids: Vec<u32> = self.targets.iter().map(|t| t.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("targets", "ids must be unique"));
        }
        for t in &self.targets {
            Footprint::new(t.length, t.width, 0.0).map_err(|e| invalid(&format!("targets[{}]", t.id), e))?;
        }
        self.driveable_space()?;
        Ok(())
    }

    pub fn driveable_space(&self) -> Result<DriveableSpace, ConfigError> {
        let r = &self.road;
        let space = DriveableSpace::from_fn(r.x_start, r.length, r.spacing, |x| {
            let (right, left) = r
                .sections
                .iter()
                .rev()
                .find(|s| s.x_from <= x && x <= s.x_to)
                .map_or((r.right, r.left), |s| (s.right, s.left));
            vec![LateralInterval::new(right, left)]
        });
        space.map_err(|e| invalid("road", e))
    }
}

/// Sets a dotted-path value (`trigger.tte_reduction`, `targets.0.vy`) in a
/// parsed scenario document.
pub fn set_parameter(doc: &mut toml::Value, name: &str, value: toml::Value) -> Result<(), ConfigError> {
    let mut cur = doc;
    let parts: Vec<&str> = name.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        let next = match cur {
            toml::Value::Table(t) => {
                if last {
                    // absent keys may be defaulted; unknown names fail on re-parse
                    t.insert(key.to_string(), value);
                    return Ok(());
                }
                t.get_mut(*key)
            }
            toml::Value::Array(a) => {
                let idx: usize = key.parse().map_err(|_| ConfigError::UnknownParameter(name.to_string()))?;
                if last {
                    let slot = a.get_mut(idx).ok_or_else(|| ConfigError::UnknownParameter(name.to_string()))?;
                    *slot = value;
                    return Ok(());
                }
                a.get_mut(idx)
            }
            _ => None,
        };
        cur = next.ok_or_else(|| ConfigError::UnknownParameter(name.to_string()))?;
    }
    Err(ConfigError::UnknownParameter(name.to_string()))
}

/// Parses a sweep value: integers, floats, booleans, else a string.
pub fn parse_value(text: &str) -> toml::Value {
    if let Ok(i) = text.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = text.parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = text.parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(text.to_string())
    }
}
