//! Trace rows, planner-cycle records and the run summary, with their text
//! serialisations. Floats are written with fixed precision so reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::io::{self, Write};

use aes_core::decision::{AesState, Trigger};
use aes_core::pathgen::Side;
use serde::{Deserialize, Serialize};

/// One row per control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub a_y: f64,
    pub tyre_saturated: bool,
    pub state: AesState,
    pub ttc: f64,
    pub tte: Option<f64>,
    pub trigger: Trigger,
    /// `side:n` of the path being followed or offered.
    pub selected: Option<String>,
    pub errors: Option<[f64; 6]>,
    pub delta_g: f64,
    pub delta_ff: f64,
    pub m_z_requested: f64,
    pub m_z: f64,
    pub m_ff: f64,
    pub brakes: [f64; 4],
    pub steer_saturated: bool,
    pub brake_saturated: bool,
    /// Contour distance to each configured target, in config order.
    pub distances: Vec<f64>,
    pub target_positions: Vec<(f64, f64)>,
    /// Transitions, invalidations and replanning notes for this tick.
    pub event: String,
}

impl TraceRow {
    pub fn y_e(&self) -> Option<f64> {
        self.errors.map(|e| e[0])
    }
}

pub fn num(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.6}");
        // avoid a distinct "-0.000000"
        if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
            "0.000000".to_string()
        } else {
            s
        }
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

const ERROR_COLUMNS: [&str; 6] = ["y_e", "y_e_dot", "psi_e", "psi_e_dot", "kappa", "kappa_dot"];

pub fn write_trace<W: Write>(out: &mut W, rows: &[TraceRow], target_ids: &[u32]) -> io::Result<()> {
    let mut header = String::from("t,x,y,psi,u,v,r,a_y,tyre_sat,state,ttc,tte,trigger,selected");
    for c in ERROR_COLUMNS {
        header.push(',');
        header.push_str(c);
    }
    header.push_str(",delta_g,delta_ff,m_z_req,m_z,m_ff,f_fl,f_fr,f_rl,f_rr,steer_sat,brake_sat");
    for id in target_ids {
        let _ = write!(header, ",dist_{id}");
    }
    header.push_str(",event");
    writeln!(out, "{header}")?;
    for r in rows {
        let mut line = format!(
            "{:.3},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            num(r.x),
            num(r.y),
            num(r.psi),
            num(r.u),
            num(r.v),
            num(r.r),
            num(r.a_y),
            r.tyre_saturated as u8,
            r.state.as_str(),
            num(r.ttc),
            opt(r.tte),
            r.trigger.as_str(),
            r.selected.as_deref().unwrap_or(""),
        );
        for i in 0..6 {
            line.push(',');
            line.push_str(&opt(r.errors.map(|e| e[i])));
        }
        for v in [r.delta_g, r.delta_ff, r.m_z_requested, r.m_z, r.m_ff] {
            line.push(',');
            line.push_str(&num(v));
        }
        for f in r.brakes {
            line.push(',');
            line.push_str(&num(f));
        }
        let _ = write!(line, ",{},{}", r.steer_saturated as u8, r.brake_saturated as u8);
        for d in &r.distances {
            line.push(',');
            line.push_str(&num(*d));
        }
        line.push(',');
        line.push_str(&r.event);
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanPhase {
    /// Regular planner cycle while monitoring or warning.
    Cycle,
    /// Planning pass at the engage tick.
    Engage,
    /// Replanning after the active path became invalid.
    Replan,
}

impl PlanPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            PlanPhase::Cycle => "cycle",
            PlanPhase::Engage => "engage",
            PlanPhase::Replan => "replan",
        }
    }
}

/// Outcome of one ranked path in one planning pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanRecord {
    pub t: f64,
    pub phase: PlanPhase,
    pub side: Side,
    pub n: usize,
    pub rejected: Option<String>,
    pub cost: Option<(f64, f64, f64)>,
    pub first_collision_time: Option<f64>,
    pub min_clearance: Option<f64>,
    pub terminal_y: f64,
    pub best: bool,
}

pub fn write_plans<W: Write>(out: &mut W, plans: &[PlanRecord]) -> io::Result<()> {
    writeln!(out, "t,phase,side,n,status,cost,severity,proximity,first_collision,min_clearance,terminal_y,best")?;
    for p in plans {
        let (c, s, x) = match p.cost {
            Some((c, s, x)) => (num(c), num(s), num(x)),
            None => Default::default(),
        };
        writeln!(
            out,
            "{:.3},{},{},{},{},{},{},{},{},{},{},{}",
            p.t,
            p.phase.as_str(),
            p.side.as_str(),
            p.n,
            p.rejected.as_deref().unwrap_or("ok"),
            c,
            s,
            x,
            opt(p.first_collision_time),
            opt(p.min_clearance),
            num(p.terminal_y),
            p.best as u8
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Avoided,
    Collided,
    Aborted,
    NoTrigger,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Avoided | Outcome::NoTrigger => 0,
            Outcome::Collided => 1,
            Outcome::Aborted => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub outcome: Outcome,
    pub reason: Option<String>,
    pub end_time: f64,
    pub final_state: AesState,
    pub evade_side: Option<Side>,
    pub engage_time: Option<f64>,
    pub engage_ttc: Option<f64>,
    pub engage_tte: Option<f64>,
    /// Distance still to travel on the no-action path at engagement [m].
    pub engage_gap: Option<f64>,
    pub engage_speed: Option<f64>,
    pub collision_time: Option<f64>,
    pub colliding_target: Option<u32>,
    pub min_clearance: Option<f64>,
    pub max_abs_a_y: f64,
    /// Largest |y_e| while in regulation [m].
    pub max_abs_lateral_error: Option<f64>,
    pub replans: usize,
    pub illegal_events: usize,
}

impl Summary {
    /// Braking distance at the engagement speed for a given deceleration.
    pub fn braking_distance(&self, decel: f64) -> Option<f64> {
        self.engage_speed.map(|v| v * v / (2.0 * decel))
    }
}
