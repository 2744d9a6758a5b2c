//! Trigger timing (TTC, TTE, warning/engage windows) and the supervisory
//! state machine that sequences an evasive intervention.

mod supervisor;
mod trigger;

pub use supervisor::{step_state_machine, AesState, Events, IllegalEvent, SupervisorState};
pub use trigger::{compute_tte, compute_ttc, evaluate_triggers, Trigger, TriggerConfig, Ttc};
