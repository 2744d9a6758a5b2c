//! Closed-loop orchestration: ground-truth world, planner cycles, supervisor
//! ticks, control ticks and the plant, all on one deterministic clock.

use aes_core::capability::{lateral_capability, CapabilityRecord, CapabilityScenario, CapabilityTuning};
use aes_core::control::{control_step, path_to_vehicle_frame, tracking_errors, ControlCommand, ControlError};
use aes_core::decision::{
    compute_tte, compute_ttc, evaluate_triggers, step_state_machine, AesState, Events, SupervisorState, Trigger,
};
use aes_core::geometry::{box_clearance, sat_check_boxes, DriveableSpace, Footprint, TargetTrack};
use aes_core::pathgen::{generate_path_set, PathTuning, SampledPath, Side};
use aes_core::plant::{plant_step, PlantState};
use aes_core::ranking::{best_index, monitor_selected, rank_paths, RankedPath, Rejection, Validity};
use aes_core::{EgoState, Pose};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{ScenarioConfig, TargetConfig};
use crate::trace::{Outcome, PlanPhase, PlanRecord, Summary, TraceRow};

/// Ranked paths of one planning pass, kept for the planar plot.
#[derive(Debug, Clone)]
pub struct PlanSnapshot {
    pub t: f64,
    pub phase: PlanPhase,
    pub ranked: Vec<RankedPath>,
    pub best: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<TraceRow>,
    pub target_ids: Vec<u32>,
    pub plans: Vec<PlanRecord>,
    pub snapshots: Vec<PlanSnapshot>,
    pub summary: Summary,
}

struct Truth {
    cfg: TargetConfig,
    fp: Footprint,
    change_at: Option<f64>,
}

impl Truth {
    fn velocity(&self, t: f64) -> (f64, f64) {
        match (self.change_at, self.cfg.after_engage) {
            (Some(tc), Some(ch)) if t >= tc => (ch.vx, ch.vy),
            _ => (self.cfg.vx, self.cfg.vy),
        }
    }

    fn pose(&self, t: f64) -> Pose {
        let c = &self.cfg;
        match (self.change_at, self.cfg.after_engage) {
            (Some(tc), Some(ch)) if t >= tc => Pose::new(
                c.x + c.vx * tc + ch.vx * (t - tc),
                c.y + c.vy * tc + ch.vy * (t - tc),
                c.psi,
            ),
            _ => Pose::new(c.x + c.vx * t, c.y + c.vy * t, c.psi),
        }
    }
}

struct Plan {
    ranked: Vec<RankedPath>,
    best: Option<usize>,
    capability: Option<CapabilityRecord>,
}

impl Plan {
    fn best_path(&self) -> Option<&RankedPath> {
        self.best.map(|i| &self.ranked[i])
    }
}

struct Active {
    label: String,
}

pub struct Simulation<'a> {
    cfg: &'a ScenarioConfig,
    space: DriveableSpace,
    truth: Vec<Truth>,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    plans: Vec<PlanRecord>,
    snapshots: Vec<PlanSnapshot>,
}

fn label(r: &RankedPath) -> String {
    format!("{}:{}", r.side.as_str(), r.n)
}

impl<'a> Simulation<'a> {
    pub fn new(cfg: &'a ScenarioConfig) -> Result<Self, crate::config::ConfigError> {
        let space = cfg.driveable_space()?;
        let truth = cfg
            .targets
            .iter()
            .map(|t| Truth {
                cfg: t.clone(),
                fp: Footprint { length: t.length, width: t.width, ref_offset: 0.0 },
                change_at: None,
            })
            .collect();
        let noise = (cfg.sim.position_noise > 0.0).then(|| Normal::new(0.0, cfg.sim.position_noise).unwrap());
        Ok(Self {
            cfg,
            space,
            truth,
            rng: ChaCha8Rng::seed_from_u64(cfg.sim.seed),
            noise,
            plans: Vec::new(),
            snapshots: Vec::new(),
        })
    }

    /// Predictions of the targets the pipeline can see at `t`.
    fn world_model(&mut self, t: f64) -> Vec<TargetTrack> {
        let p = &self.cfg.planner;
        let mut out = Vec::new();
        for tr in &self.truth {
            if t + 1e-9 < tr.cfg.appear_time {
                continue;
            }
            let mut pose = tr.pose(t);
            if let Some(n) = &self.noise {
                pose.x += n.sample(&mut self.rng);
                pose.y += n.sample(&mut self.rng);
            }
            out.push(TargetTrack::constant_velocity(
                tr.cfg.id,
                tr.cfg.kind,
                tr.fp,
                pose,
                tr.velocity(t),
                p.prediction_horizon,
                p.prediction_dt,
            ));
        }
        out
    }

    fn in_range(&self, ego: &PlantState, targets: &[TargetTrack]) -> bool {
        let range = self.cfg.planner.perception_range;
        let behind = self.cfg.footprint.length;
        targets.iter().any(|tr| {
            let p = tr.predicted[0].pose;
            let (dx, _) = ego.pose().apply_inverse(p.x, p.y);
            dx >= -behind && dx <= range
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn plan(
        &mut self,
        ego: &EgoState,
        t: f64,
        targets: &[TargetTrack],
        scenario: CapabilityScenario,
        cap_tuning: &CapabilityTuning,
        path_tuning: &PathTuning,
        sides: &[Side],
        phase: PlanPhase,
    ) -> Plan {
        let cfg = self.cfg;
        let capability = lateral_capability(scenario, &cfg.vehicle, ego, cap_tuning).ok();
        let mut ranked = Vec::new();
        if let Some(cap) = &capability {
            for &side in sides {
                if let Ok(set) = generate_path_set(ego, cap, &self.space, &cfg.footprint, path_tuning, side, t) {
                    ranked.extend(rank_paths(&set, targets, &self.space, &cfg.footprint, &cfg.planner.cost, cfg.planner.dt_check));
                }
            }
        }
        let best = best_index(&ranked);
        for (i, r) in ranked.iter().enumerate() {
            self.plans.push(PlanRecord {
                t,
                phase,
                side: r.side,
                n: r.n,
                rejected: r.rejected.map(|x| match x {
                    Rejection::NotDriveable => "not-driveable".to_string(),
                    Rejection::Collision => "collision".to_string(),
                }),
                cost: r.cost.map(|c| (c.total, c.severity, c.proximity)),
                first_collision_time: r.first_collision_time,
                min_clearance: r.min_clearance,
                terminal_y: r.path.world_pose(r.path.len() - 1).y,
                best: Some(i) == best,
            });
        }
        if phase != PlanPhase::Cycle {
            self.snapshots.push(PlanSnapshot { t, phase, ranked: ranked.clone(), best });
        }
        Plan { ranked, best, capability }
    }

    fn regular_plan(&mut self, ego: &EgoState, t: f64, targets: &[TargetTrack], phase: PlanPhase) -> Plan {
        let p = &self.cfg.planner;
        let (sc, ct, pt, sides) = (p.scenario, p.capability, p.path, p.sides.clone());
        self.plan(ego, t, targets, sc, &ct, &pt, &sides, phase)
    }

    /// Replanning from a mid-manoeuvre state: no pre-braking, both sides.
    fn replan(&mut self, ego: &EgoState, t: f64, targets: &[TargetTrack]) -> Plan {
        let p = &self.cfg.planner;
        let sc = p.scenario.without_prebraking();
        let ct = CapabilityTuning { t_pb: 0.0, ..p.capability };
        let pt = PathTuning { t_pb: 0.0, ..p.path };
        let mut sides = p.sides.clone();
        for s in [Side::Right, Side::Left] {
            if !sides.contains(&s) {
                sides.push(s);
            }
        }
        self.plan(ego, t, targets, sc, &ct, &pt, &sides, PlanPhase::Replan)
    }

    pub fn run(mut self) -> RunOutput {
        let cfg = self.cfg;
        let dt = cfg.sim.dt_plant;
        let ticks = |period: f64| ((period / dt).round() as usize).max(1);
        let (per_ctrl, per_sup, per_plan) =
            (ticks(cfg.controller.dt_control), ticks(cfg.sim.dt_supervisor), ticks(cfg.planner.dt_cycle));
        let n_total = (cfg.sim.duration / dt).round() as usize;
        let dt_fine = cfg.controller.dt_control;

        let mut plant = PlantState::new(cfg.ego);
        let mut sup = SupervisorState::new(AesState::Off);
        let mut cmd = ControlCommand::passive(0.0);
        let mut a_x_cmd = 0.0;
        let mut flags = aes_core::plant::PlantFlags::default();
        let mut rows: Vec<TraceRow> = Vec::new();

        let mut candidate: Option<(SampledPath, f64, String)> = None; // path, generation time, label
        let mut tte: Option<f64> = None;
        let mut ttc = f64::INFINITY;
        let mut trigger = Trigger::None;
        let mut active: Option<Active> = None;
        let mut event = String::new();
        let mut pending_validity: Option<(bool, Option<SampledPath>, String)> = None;

        let mut summary = Summary {
            scenario: cfg.name.clone(),
            outcome: Outcome::NoTrigger,
            reason: None,
            end_time: 0.0,
            final_state: AesState::Off,
            evade_side: None,
            engage_time: None,
            engage_ttc: None,
            engage_tte: None,
            engage_gap: None,
            engage_speed: None,
            collision_time: None,
            colliding_target: None,
            min_clearance: None,
            max_abs_a_y: 0.0,
            max_abs_lateral_error: None,
            replans: 0,
            illegal_events: 0,
        };
        let mut finished: Option<(Outcome, Option<String>)> = None;

        for k in 0..=n_total {
            let t = k as f64 * dt;
            plant.t = t;
            let ego_box = cfg.footprint.obb(&plant.pose());

            // ground truth contact
            for tr in &self.truth {
                let tb = tr.fp.obb(&tr.pose(t));
                if sat_check_boxes(&ego_box, &tb) {
                    summary.collision_time = Some(t);
                    summary.colliding_target = Some(tr.cfg.id);
                    finished = Some((Outcome::Collided, Some(format!("contact with target {}", tr.cfg.id))));
                    break;
                }
            }

            let ego = plant.ego(a_x_cmd);
            let plan_due = k % per_plan == 0;
            let sup_due = k % per_sup == 0;
            let ctrl_due = k % per_ctrl == 0;

            let mut targets: Option<Vec<TargetTrack>> = None;
            if (plan_due || sup_due) && finished.is_none() {
                targets = Some(self.world_model(t));
            }

            if plan_due && finished.is_none() {
                let world = targets.as_ref().unwrap();
                match sup.state {
                    AesState::Standby | AesState::Monitoring | AesState::Warning if self.in_range(&plant, world) => {
                        let plan = self.regular_plan(&ego, t, world, PlanPhase::Cycle);
                        match plan.best_path() {
                            Some(best) => {
                                tte = Some(compute_tte(&best.path.profile, &cfg.trigger));
                                candidate = Some((best.path.resample(dt_fine), t, label(best)));
                            }
                            None => {
                                tte = None;
                                candidate = None;
                            }
                        }
                    }
                    AesState::InRegulation => {
                        let (path, start) = (sup.selected_path.as_ref().unwrap(), sup.path_start.unwrap());
                        let remaining = path.suffix_from(t - start);
                        if remaining.len() > 1 {
                            if let Validity::Invalid(reason) =
                                monitor_selected(&remaining, world, &self.space, &cfg.footprint, cfg.planner.dt_check)
                            {
                                push_event(&mut event, &format!("invalid:{reason}"));
                                let plan = self.replan(&ego, t, world);
                                summary.replans += 1;
                                match plan.best_path() {
                                    Some(best) => {
                                        let l = label(best);
                                        push_event(&mut event, &format!("replanned:{l}"));
                                        pending_validity = Some((false, Some(best.path.resample(dt_fine)), l));
                                    }
                                    None => {
                                        push_event(&mut event, "replan-failed");
                                        pending_validity = Some((false, None, String::new()));
                                    }
                                }
                                let _ = plan.capability;
                            }
                        }
                    }
                    _ => {
                        tte = None;
                        candidate = None;
                    }
                }
            }

            if sup_due && finished.is_none() {
                let world = targets.as_ref().unwrap();
                let present = self.in_range(&plant, world);
                ttc = compute_ttc(&ego, world, &cfg.footprint, cfg.trigger.ttc_horizon).value;
                trigger = match (sup.state, tte) {
                    (AesState::Monitoring | AesState::Warning, Some(tte)) if candidate.is_some() => {
                        evaluate_triggers(ttc, tte, &cfg.trigger)
                    }
                    _ => Trigger::None,
                };
                let mut ev = Events {
                    now: t,
                    initialize: sup.state == AesState::Off && k == 0,
                    targets_present: present,
                    perception_ok: true,
                    ..Default::default()
                };
                if matches!(sup.state, AesState::Monitoring | AesState::Warning) {
                    ev.trigger = Some(trigger);
                    if trigger != Trigger::None {
                        if sup.state == AesState::Warning && trigger == Trigger::Engage {
                            // plan once more from the exact engage state
                            let plan = self.regular_plan(&ego, t, world, PlanPhase::Engage);
                            if let Some(best) = plan.best_path() {
                                candidate = Some((best.path.resample(dt_fine), t, label(best)));
                            }
                        }
                        ev.candidate_path = candidate.as_ref().map(|(p, t0, _)| p.suffix_from(t - t0));
                    }
                }
                if sup.state == AesState::InRegulation {
                    let done = sup.path_remaining(t).is_some_and(|r| r <= 1e-9);
                    ev.manoeuvre_complete = done;
                    if !done {
                        if let Some((valid, path, l)) = pending_validity.take() {
                            ev.path_valid = Some(valid);
                            ev.replanned_path = path;
                            if !l.is_empty() {
                                active = Some(Active { label: l });
                            }
                        }
                    }
                }
                let before = sup.state;
                match step_state_machine(&sup, &ev) {
                    Ok(next) => sup = next,
                    Err(e) => {
                        summary.illegal_events += 1;
                        push_event(&mut event, &format!("illegal:{e}"));
                    }
                }
                if sup.state != before {
                    push_event(&mut event, &format!("{}->{}", before.as_str(), sup.state.as_str()));
                    if sup.state == AesState::InRegulation {
                        let l = candidate.as_ref().map(|c| c.2.clone()).unwrap_or_default();
                        summary.engage_time = Some(t);
                        summary.engage_ttc = Some(ttc);
                        summary.engage_tte = tte;
                        summary.engage_gap = Some(ttc * plant.u);
                        summary.engage_speed = Some(plant.u);
                        summary.evade_side = candidate.as_ref().and_then(|c| c.0.profile.side);
                        active = Some(Active { label: l });
                    }
                    match sup.state {
                        AesState::Aborted => {
                            finished = Some((Outcome::Aborted, sup.abort_reason.clone()));
                        }
                        AesState::Monitoring if before == AesState::InRegulation => {
                            finished = Some((Outcome::Avoided, None));
                        }
                        _ => {}
                    }
                }
            }

            if ctrl_due {
                let mut errors = None;
                if sup.state == AesState::InRegulation && finished.is_none() {
                    let (path, start) = (sup.selected_path.clone().unwrap(), sup.path_start.unwrap());
                    let ego_in_path = path.frame.relative(&plant.pose());
                    let local = path_to_vehicle_frame(&path, &ego_in_path);
                    let step = tracking_errors(&local, &plant).and_then(|e| {
                        errors = Some([e.y_e, e.y_e_dot, e.psi_e, e.psi_e_dot, e.kappa, e.kappa_dot]);
                        control_step(&e, &plant, &cfg.vehicle, &cfg.controller)
                    });
                    match step {
                        Ok(c) => cmd = c,
                        Err(ControlError::PathExhausted { .. }) => cmd = ControlCommand::passive(0.0),
                        Err(e) => {
                            let next = step_state_machine(&sup, &Events { now: t, system_error: Some(e.to_string()), ..Default::default() });
                            if let Ok(next) = next {
                                push_event(&mut event, &format!("in_regulation->aborted:{e}"));
                                sup = next;
                                finished = Some((Outcome::Aborted, Some(e.to_string())));
                            }
                            cmd = ControlCommand::passive(0.0);
                        }
                    }
                    // pre-braking while the path's speed still decreases
                    let tau = t - start;
                    let bp = &path.profile.breakpoints;
                    a_x_cmd = if bp.len() > 1 && tau < bp[1].t - bp[0].t && bp[1].t > bp[0].t {
                        (bp[1].v_x - bp[0].v_x) / (bp[1].t - bp[0].t)
                    } else {
                        0.0
                    };
                } else {
                    cmd = ControlCommand::passive(0.0);
                    a_x_cmd = 0.0;
                }
                if let Some(e) = errors {
                    let m = summary.max_abs_lateral_error.unwrap_or(0.0).max(e[0].abs());
                    summary.max_abs_lateral_error = Some(m);
                }

                let mut distances = Vec::with_capacity(self.truth.len());
                let mut positions = Vec::with_capacity(self.truth.len());
                for tr in &self.truth {
                    let pose = tr.pose(t);
                    let tb = tr.fp.obb(&pose);
                    let d = if sat_check_boxes(&ego_box, &tb) { 0.0 } else { box_clearance(&ego_box, &tb) };
                    summary.min_clearance = Some(summary.min_clearance.map_or(d, |m: f64| m.min(d)));
                    distances.push(d);
                    positions.push((pose.x, pose.y));
                }
                let selected = match sup.state {
                    AesState::InRegulation => active.as_ref().map(|a| a.label.clone()),
                    AesState::Warning => candidate.as_ref().map(|c| c.2.clone()),
                    _ => None,
                };
                rows.push(TraceRow {
                    t,
                    x: plant.x,
                    y: plant.y,
                    psi: plant.psi,
                    u: plant.u,
                    v: plant.v,
                    r: plant.r,
                    a_y: flags.a_y,
                    tyre_saturated: flags.saturated,
                    state: sup.state,
                    ttc,
                    tte,
                    trigger,
                    selected,
                    errors,
                    delta_g: cmd.delta_g,
                    delta_ff: cmd.delta_ff,
                    m_z_requested: cmd.m_z_requested,
                    m_z: cmd.m_z_ext,
                    m_ff: cmd.m_ff,
                    brakes: [cmd.brake_forces.fl, cmd.brake_forces.fr, cmd.brake_forces.rl, cmd.brake_forces.rr],
                    steer_saturated: cmd.steer_saturated,
                    brake_saturated: cmd.brake_saturated,
                    distances,
                    target_positions: positions,
                    event: std::mem::take(&mut event),
                });
            }

            // the engage tick starts the target manoeuvres keyed to it
            if let Some(te) = summary.engage_time {
                for tr in &mut self.truth {
                    if tr.change_at.is_none() {
                        if let Some(ch) = tr.cfg.after_engage {
                            tr.change_at = Some(te + ch.delay);
                        }
                    }
                }
            }

            if finished.is_some() || k == n_total {
                summary.end_time = t;
                break;
            }

            match plant_step(&plant, &cmd, a_x_cmd, dt, &cfg.vehicle, cfg.controller.u_min) {
                Ok((next, f)) => {
                    plant = next;
                    flags = f;
                    summary.max_abs_a_y = summary.max_abs_a_y.max(f.a_y.abs());
                }
                Err(e) => {
                    if let Ok(next) = step_state_machine(&sup, &Events { now: t, system_error: Some(e.to_string()), ..Default::default() }) {
                        sup = next;
                    }
                    finished = Some((Outcome::Aborted, Some(e.to_string())));
                    summary.end_time = t;
                    break;
                }
            }
        }

        summary.final_state = sup.state;
        match finished {
            Some((o, reason)) => {
                summary.outcome = o;
                summary.reason = reason;
            }
            None => {
                summary.outcome = if summary.engage_time.is_some() { Outcome::Avoided } else { Outcome::NoTrigger };
            }
        }
        RunOutput {
            rows,
            target_ids: cfg.targets.iter().map(|t| t.id).collect(),
            plans: self.plans,
            snapshots: self.snapshots,
            summary,
        }
    }
}

fn push_event(buf: &mut String, e: &str) {
    if !buf.is_empty() {
        buf.push(';');
    }
    // keep the CSV cell free of separators
    buf.push_str(&e.replace(',', " "));
}

/// Runs a validated scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, crate::config::ConfigError> {
    Ok(Simulation::new(cfg)?.run())
}
