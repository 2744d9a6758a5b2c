use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Trigger;
use crate::pathgen::SampledPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AesState {
    Off,
    Standby,
    Monitoring,
    Warning,
    InRegulation,
    Aborted,
}

impl AesState {
    pub const ALL: [AesState; 6] = [
        AesState::Off,
        AesState::Standby,
        AesState::Monitoring,
        AesState::Warning,
        AesState::InRegulation,
        AesState::Aborted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AesState::Off => "off",
            AesState::Standby => "standby",
            AesState::Monitoring => "monitoring",
            AesState::Warning => "warning",
            AesState::InRegulation => "in_regulation",
            AesState::Aborted => "aborted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisorState {
    pub state: AesState,
    /// Path the vehicle would (Warning) or does (InRegulation) follow, in the
    /// planning frame; its time axis starts at `path_start`.
    pub selected_path: Option<SampledPath>,
    pub engage_time: Option<f64>,
    /// Simulation time corresponding to t = 0 of `selected_path`.
    pub path_start: Option<f64>,
    pub abort_reason: Option<String>,
}

impl SupervisorState {
    pub fn new(state: AesState) -> Self {
        Self { state, selected_path: None, engage_time: None, path_start: None, abort_reason: None }
    }

    /// Remaining time on the active path, if any.
    pub fn path_remaining(&self, now: f64) -> Option<f64> {
        match (&self.selected_path, self.path_start) {
            (Some(p), Some(t0)) => Some(p.end_time() - (now - t0)),
            _ => None,
        }
    }

    fn with_state(&self, state: AesState) -> Self {
        Self { state, ..Self::new(state) }
    }
}

impl Default for SupervisorState {
    fn default() -> Self {
        Self::new(AesState::Off)
    }
}

/// Everything the pipeline observed during one supervisor tick.
#[derive(Debug, Clone, Default)]
pub struct Events {
    pub now: f64,
    pub initialize: bool,
    pub reinitialize: bool,
    pub shutdown: bool,
    pub targets_present: bool,
    pub perception_ok: bool,
    pub trigger: Option<Trigger>,
    /// Best-ranked feasible path of the latest planner cycle.
    pub candidate_path: Option<SampledPath>,
    /// Validity of the active path (InRegulation only).
    pub path_valid: Option<bool>,
    pub replanned_path: Option<SampledPath>,
    pub manoeuvre_complete: bool,
    pub system_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IllegalEvent {
    #[error("trigger {trigger} while {state}")]
    TriggerWithoutMonitoring { state: &'static str, trigger: &'static str },
    #[error("trigger {0} raised without a candidate path")]
    TriggerWithoutPath(&'static str),
    #[error("{event} outside of regulation (state {state})")]
    NotRegulating { state: &'static str, event: &'static str },
    #[error("initialize/reinitialize not valid in state {0}")]
    BadInitialize(&'static str),
}

/// One deterministic supervisor transition. Illegal event combinations are
/// rejected and the caller keeps the previous state.
pub fn step_state_machine(s: &SupervisorState, ev: &Events) -> Result<SupervisorState, IllegalEvent> {
    use AesState::*;
    let name = s.state.as_str();
    let trig = ev.trigger.unwrap_or(Trigger::None);

    if s.state != InRegulation {
        if ev.replanned_path.is_some() {
            return Err(IllegalEvent::NotRegulating { state: name, event: "replanned path" });
        }
        if ev.manoeuvre_complete {
            return Err(IllegalEvent::NotRegulating { state: name, event: "manoeuvre completion" });
        }
    }
    if ev.initialize && s.state != Off {
        return Err(IllegalEvent::BadInitialize(name));
    }
    if ev.reinitialize && s.state != Aborted {
        return Err(IllegalEvent::BadInitialize(name));
    }
    if ev.shutdown {
        return Ok(s.with_state(Off));
    }

    let next = match s.state {
        Off => {
            if trig != Trigger::None {
                return Err(IllegalEvent::TriggerWithoutMonitoring { state: name, trigger: trig.as_str() });
            }
            if ev.initialize {
                s.with_state(Standby)
            } else {
                s.clone()
            }
        }
        Standby => {
            if ev.targets_present && ev.perception_ok {
                s.with_state(Monitoring)
            } else if trig != Trigger::None {
                return Err(IllegalEvent::TriggerWithoutMonitoring { state: name, trigger: trig.as_str() });
            } else {
                s.clone()
            }
        }
        Monitoring => {
            if let Some(e) = &ev.system_error {
                aborted(e)
            } else if !ev.targets_present || !ev.perception_ok {
                s.with_state(Standby)
            } else if trig != Trigger::None {
                // an engage condition seen first while monitoring only warns
                let Some(p) = &ev.candidate_path else {
                    return Err(IllegalEvent::TriggerWithoutPath(trig.as_str()));
                };
                SupervisorState { selected_path: Some(p.clone()), path_start: Some(ev.now), ..s.with_state(Warning) }
            } else {
                s.clone()
            }
        }
        Warning => {
            if let Some(e) = &ev.system_error {
                aborted(e)
            } else if !ev.targets_present || !ev.perception_ok || trig == Trigger::None {
                s.with_state(Monitoring)
            } else {
                let Some(p) = &ev.candidate_path else {
                    return Err(IllegalEvent::TriggerWithoutPath(trig.as_str()));
                };
                let mut n = SupervisorState { selected_path: Some(p.clone()), path_start: Some(ev.now), ..s.with_state(Warning) };
                if trig == Trigger::Engage {
                    n.state = InRegulation;
                    n.engage_time = Some(ev.now);
                }
                n
            }
        }
        InRegulation => {
            if let Some(e) = &ev.system_error {
                aborted(e)
            } else if ev.manoeuvre_complete {
                s.with_state(Monitoring)
            } else if ev.path_valid == Some(false) {
                match &ev.replanned_path {
                    Some(p) => SupervisorState { selected_path: Some(p.clone()), path_start: Some(ev.now), ..s.clone() },
                    None => aborted("active path invalid and no feasible replanned path"),
                }
            } else {
                s.clone()
            }
        }
        Aborted => {
            if ev.reinitialize {
                s.with_state(Standby)
            } else {
                s.clone()
            }
        }
    };
    Ok(next)
}

fn aborted(reason: &str) -> SupervisorState {
    SupervisorState { abort_reason: Some(reason.to_string()), ..SupervisorState::new(AesState::Aborted) }
}
