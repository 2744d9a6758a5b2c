//! Breakpoint construction for the maximum-severity manoeuvre.

use serde::{Deserialize, Serialize};

use super::{PathError, PathTuning, Side};
use crate::capability::CapabilityRecord;
use crate::vehicle::EgoState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t: f64,
    pub rho: f64,
    pub v_x: f64,
}

/// Piecewise-linear curvature/speed profile over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub breakpoints: Vec<Breakpoint>,
    pub side: Option<Side>,
    pub capability: Option<CapabilityRecord>,
    /// Curvature bound the profile was built against [1/m].
    pub rho_limit: f64,
    /// Heading bound the profile was built against [rad].
    pub psi_limit: f64,
    /// Heading relative to the road at t0 [rad].
    pub psi_start: f64,
    pub rho_road: f64,
}

impl CurvatureProfile {
    /// Constant curvature and speed for `duration` seconds.
    pub fn constant(rho: f64, v_x: f64, psi_start: f64, duration: f64) -> Self {
        Self {
            breakpoints: vec![Breakpoint { t: 0.0, rho, v_x }, Breakpoint { t: duration, rho, v_x }],
            side: None,
            capability: None,
            rho_limit: rho.abs(),
            psi_limit: f64::INFINITY,
            psi_start,
            rho_road: 0.0,
        }
    }

    pub fn t(&self, i: usize) -> f64 {
        self.breakpoints[i].t
    }

    pub fn start_time(&self) -> f64 {
        self.breakpoints[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].t
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    /// End of the evasive part (t8 − t0); the full duration for short profiles.
    pub fn evasion_duration(&self) -> f64 {
        let i = 8.min(self.breakpoints.len() - 1);
        self.t(i) - self.start_time()
    }

    /// Index `i` of the segment `[t_i, t_{i+1}]` containing `t`, preferring the
    /// last non-degenerate one.
    fn segment(&self, t: f64) -> Option<usize> {
        let bp = &self.breakpoints;
        if bp.len() < 2 || t < bp[0].t || t > bp[bp.len() - 1].t {
            return None;
        }
        let mut found = None;
        for i in 0..bp.len() - 1 {
            if bp[i].t <= t && t <= bp[i + 1].t && bp[i + 1].t > bp[i].t {
                found = Some(i);
                if t < bp[i + 1].t {
                    break;
                }
            }
        }
        found
    }

    fn interp(&self, t: f64, f: impl Fn(&Breakpoint) -> f64) -> f64 {
        let bp = &self.breakpoints;
        if t <= bp[0].t {
            // a zero-length first segment means the later value already applies at t0
            let last_at_start = bp.iter().take_while(|b| b.t <= bp[0].t).last().unwrap();
            return if t < bp[0].t { f(&bp[0]) } else { f(last_at_start) };
        }
        if t >= bp[bp.len() - 1].t {
            return f(&bp[bp.len() - 1]);
        }
        match self.segment(t) {
            Some(i) => {
                let (p, q) = (&bp[i], &bp[i + 1]);
                let s = (t - p.t) / (q.t - p.t);
                f(p) + s * (f(q) - f(p))
            }
            None => f(&bp[bp.len() - 1]),
        }
    }

    pub fn curvature_at(&self, t: f64) -> f64 {
        self.interp(t, |b| b.rho)
    }

    pub fn velocity_at(&self, t: f64) -> f64 {
        self.interp(t, |b| b.v_x)
    }

    /// Exact heading change ∫ ρ v dt over `[t_from, t_to]` ⊂ profile span.
    ///
    /// ρ·v is quadratic on each segment, so Simpson's rule per segment is exact.
    fn heading_integral(&self, t_from: f64, t_to: f64) -> f64 {
        let bp = &self.breakpoints;
        let mut total = 0.0;
        for i in 0..bp.len() - 1 {
            let (p, q) = (&bp[i], &bp[i + 1]);
            let lo = p.t.max(t_from);
            let hi = q.t.min(t_to);
            if hi <= lo || q.t <= p.t {
                continue;
            }
            let f = |t: f64| {
                let s = (t - p.t) / (q.t - p.t);
                (p.rho + s * (q.rho - p.rho)) * (p.v_x + s * (q.v_x - p.v_x))
            };
            total += (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
        }
        total
    }

    /// Heading relative to the road at time `t`, integrated exactly.
    pub fn heading_at(&self, t: f64) -> f64 {
        let (t0, tn) = (self.start_time(), self.end_time());
        let inside = self.heading_integral(t0, t.clamp(t0, tn));
        let beyond = if t > tn {
            let last = &self.breakpoints[self.breakpoints.len() - 1];
            last.rho * last.v_x * (t - tn)
        } else {
            0.0
        };
        // the road itself turns at rho_road; heading is measured against it
        let road = if self.rho_road == 0.0 { 0.0 } else { self.rho_road * self.distance_to(t) };
        self.psi_start + inside + beyond - road
    }

    /// Arc length travelled from t0 to `t`.
    pub fn distance_to(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        let mut total = 0.0;
        for i in 0..bp.len() - 1 {
            let (p, q) = (&bp[i], &bp[i + 1]);
            let lo = p.t;
            let hi = q.t.min(t);
            if hi <= lo {
                continue;
            }
            let vq = p.v_x + (hi - p.t) / (q.t - p.t) * (q.v_x - p.v_x);
            total += 0.5 * (p.v_x + vq) * (hi - lo);
        }
        if t > self.end_time() {
            total += bp[bp.len() - 1].v_x * (t - self.end_time());
        }
        total
    }

    /// Largest |ρ| over the breakpoints (the profile is linear in between).
    pub fn max_abs_curvature(&self) -> f64 {
        self.breakpoints.iter().map(|b| b.rho.abs()).fold(0.0, f64::max)
    }

    /// Largest |Δρ/Δt| over non-degenerate segments.
    pub fn max_curvature_rate(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .filter(|w| w[1].t > w[0].t)
            .map(|w| ((w[1].rho - w[0].rho) / (w[1].t - w[0].t)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest |heading| over the profile, from the exact heading at every
    /// breakpoint and at every interior extremum (where ρ crosses zero).
    pub fn max_abs_heading(&self) -> f64 {
        let mut best = self.psi_start.abs();
        for w in self.breakpoints.windows(2) {
            best = best.max(self.heading_at(w[1].t).abs());
            if w[1].t > w[0].t && w[0].rho * w[1].rho < 0.0 {
                let tz = w[0].t + (0.0 - w[0].rho) / (w[1].rho - w[0].rho) * (w[1].t - w[0].t);
                best = best.max(self.heading_at(tz).abs());
            }
        }
        best
    }

    /// Mirror image about the road axis.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for b in &mut out.breakpoints {
            b.rho = -b.rho;
        }
        out.side = self.side.map(Side::opposite);
        out.psi_start = -self.psi_start;
        out.rho_road = -self.rho_road;
        out
    }
}

/// Heading still available before the heading bound once pre-braking is done;
/// non-positive means no evasion to `side` is possible.
pub fn heading_headroom(
    init: &EgoState,
    cap: &CapabilityRecord,
    tuning: &PathTuning,
    side: Side,
    psi_limit: f64,
) -> f64 {
    let s = side.sign();
    let (v0, v1) = (init.v_x, cap.v_x_evasion);
    let c0 = s * init.yaw_rate / v0 - s * tuning.rho_road;
    let c1 = v0 * c0 / v1;
    let psi_tot1 = tuning.t_pb * (c0 * v0 + c1 * v1) / 2.0;
    psi_limit - (s * init.psi + psi_tot1)
}

pub fn build_max_severity_profile(
    init: &EgoState,
    cap: &CapabilityRecord,
    tuning: &PathTuning,
    side: Side,
) -> Result<CurvatureProfile, PathError> {
    build_profile(init, cap, tuning, side, cap.rho_max, tuning.psi_max)
}

/// Builds the t0..t9 profile against the bounds `rho_limit` / `psi_limit`.
///
/// The construction works on the left-hand manoeuvre in road-relative
/// curvature `c = ρ − ρ_road`; a right-hand request mirrors the inputs and
/// negates the result.
pub fn build_profile(
    init: &EgoState,
    cap: &CapabilityRecord,
    tuning: &PathTuning,
    side: Side,
    rho_limit: f64,
    psi_limit: f64,
) -> Result<CurvatureProfile, PathError> {
    tuning.validate()?;
    if !(init.v_x > 0.0 && init.v_x.is_finite()) {
        return Err(PathError::InvalidInput(format!("ego speed {} must be positive", init.v_x)));
    }
    if !(cap.v_x_evasion > 0.0 && cap.rho_dot_max > 0.0 && rho_limit >= 0.0) {
        return Err(PathError::InvalidInput("capability record out of range".into()));
    }
    if !(psi_limit > 0.0) {
        return Err(PathError::InvalidInput(format!("heading bound {psi_limit} must be positive")));
    }
    let s = side.sign();
    let rd = cap.rho_dot_max;
    let (v0, v1) = (init.v_x, cap.v_x_evasion);
    let road = s * tuning.rho_road;
    let psi_ego = s * init.psi;

    let headroom = heading_headroom(init, cap, tuning, side, psi_limit);
    if headroom < 0.0 {
        return Err(PathError::InfeasibleProfile { headroom });
    }

    let t0 = 0.0;
    let c0 = s * init.yaw_rate / v0 - road;
    let t1 = t0 + tuning.t_pb;
    let c1 = v0 * c0 / v1;

    // Peak curvature: ramp c1 → c2 → 0 must use exactly the headroom when no
    // plateau is needed; with c1 = 0 this is c2 = √(H ρ̇ / v).
    let c_lim = (rho_limit - road).max(0.0);
    let c_free = (headroom * rd / v1 + 0.5 * c1 * c1).sqrt();
    let clamped = c_free >= c_lim;
    let mut c2 = if clamped { c_lim } else { c_free };
    if c2 < c1 {
        // already turning harder than the remaining headroom allows: unwind directly
        c2 = c1;
    }
    let t2 = t1 + (c2 - c1).abs() / rd;

    let ramps = 0.5 * v1 * (c1 + c2) * (t2 - t1) + 0.5 * v1 * c2 * c2 / rd;
    let plateau = if clamped && c2 > 0.0 { (headroom - ramps).max(0.0) / (v1 * c2) } else { 0.0 };
    let t3 = t2 + plateau;
    let t4 = t3 + c2.abs() / rd;

    let mut bp = vec![
        Breakpoint { t: t0, rho: c0, v_x: v0 },
        Breakpoint { t: t1, rho: c1, v_x: v1 },
        Breakpoint { t: t2, rho: c2, v_x: v1 },
        Breakpoint { t: t3, rho: c2, v_x: v1 },
        Breakpoint { t: t4, rho: 0.0, v_x: v1 },
    ];
    let partial = CurvatureProfile {
        breakpoints: bp.clone(),
        side: Some(Side::Left),
        capability: Some(*cap),
        rho_limit,
        psi_limit,
        psi_start: psi_ego,
        rho_road: 0.0,
    };
    let psi4 = partial.heading_at(t4);

    let t5 = if tuning.y_offset > 0.0 && psi4.sin() > 0.0 {
        t4 + tuning.y_offset / (v1 * psi4.sin())
    } else {
        t4
    };
    let psi5 = psi4;

    // Counter-steer: cancel psi5 with a trapezoid of height m6.
    let (mut m6, mut gap) = (0.0, 0.0);
    if psi5 != 0.0 {
        let cap6 = if psi5 > 0.0 { rho_limit + road } else { rho_limit - road }.max(0.0);
        m6 = (psi_limit * rd / v1).sqrt().min(tuning.i_sb * c2.abs());
        if !(m6 > 0.0) {
            m6 = (psi5.abs() * rd / v1).sqrt();
        }
        m6 = m6.min(cap6);
        if m6 > 0.0 {
            gap = psi5.abs() / (m6 * v1) - m6 / rd;
            if gap < 0.0 {
                m6 = (psi5.abs() * rd / v1).sqrt();
                gap = 0.0;
            }
        }
    }
    let c6 = -psi5.signum() * m6;
    let t6 = t5 + m6 / rd;
    let t7 = t6 + gap;
    let t8 = t7 + m6 / rd;
    let t9 = t8 + tuning.t_stabilize;
    bp.extend_from_slice(&[
        Breakpoint { t: t5, rho: 0.0, v_x: v1 },
        Breakpoint { t: t6, rho: c6, v_x: v1 },
        Breakpoint { t: t7, rho: c6, v_x: v1 },
        Breakpoint { t: t8, rho: 0.0, v_x: v1 },
        Breakpoint { t: t9, rho: 0.0, v_x: v1 },
    ]);

    for b in &mut bp {
        b.rho = s * (b.rho + road);
    }
    Ok(CurvatureProfile {
        breakpoints: bp,
        side: Some(side),
        capability: Some(*cap),
        rho_limit,
        psi_limit,
        psi_start: init.psi,
        rho_road: tuning.rho_road,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capability::CapabilityScenario;
    use approx::assert_relative_eq;

    fn cap(rho_max: f64) -> CapabilityRecord {
        CapabilityRecord {
            scenario: CapabilityScenario::Combined,
            a_x_min: -9.81,
            rho_max,
            rho_dot_max: 0.2,
            v_x_evasion: 20.0,
        }
    }

    fn tuning() -> PathTuning {
        PathTuning { psi_max: 0.2, i_sb: 0.8, t_stabilize: 1.0, ..Default::default() }
    }

    fn ego() -> EgoState {
        EgoState::new(0.0, 0.0, 0.0, 20.0)
    }

    #[test]
    fn unclamped_peak_curvature() {
        let p = build_max_severity_profile(&ego(), &cap(0.1), &tuning(), Side::Left).unwrap();
        let rho2 = (0.2f64 * 0.2 / 20.0).sqrt();
        assert_relative_eq!(p.breakpoints[2].rho, rho2, max_relative = 1e-14);
        assert!((rho2 - 0.04472).abs() < 1e-5);
        assert_relative_eq!(p.t(2) - p.t(1), rho2 / 0.2, max_relative = 1e-14);
        assert!((p.t(2) - p.t(1) - 0.2236).abs() < 1e-4);
        assert_eq!(p.t(3), p.t(2));
        // peak heading exactly reaches the bound
        assert_relative_eq!(p.heading_at(p.t(4)), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn peak_curvature_solves_the_heading_balance_numerically() {
        // Independent check: bisection on ψ_max/(ρ v) = ρ/ρ̇ for ρ.
        let f = |rho: f64| 0.2 / (rho * 20.0) - rho / 0.2;
        let (mut lo, mut hi) = (1e-6, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let p = build_max_severity_profile(&ego(), &cap(0.1), &tuning(), Side::Left).unwrap();
        assert!((p.breakpoints[2].rho - lo).abs() < 1e-12);
    }

    #[test]
    fn clamped_peak_inserts_plateau() {
        let p = build_max_severity_profile(&ego(), &cap(0.03), &tuning(), Side::Left).unwrap();
        assert_eq!(p.breakpoints[2].rho, 0.03);
        assert!(p.t(3) - p.t(2) > 0.0);
        assert_relative_eq!(p.heading_at(p.t(4)), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn zero_headroom_gives_straight_profile() {
        let mut e = ego();
        e.psi = 0.2;
        let p = build_max_severity_profile(&e, &cap(0.1), &tuning(), Side::Left).unwrap();
        assert!(p.breakpoints.iter().skip(1).take(4).all(|b| b.rho == 0.0));
        // the existing heading is still cancelled by the counter-steer
        assert!(p.heading_at(p.end_time()).abs() < 1e-12);
    }

    #[test]
    fn negative_headroom_is_infeasible_only_on_that_side() {
        let mut e = ego();
        e.psi = 0.25;
        assert!(matches!(
            build_max_severity_profile(&e, &cap(0.1), &tuning(), Side::Left),
            Err(PathError::InfeasibleProfile { .. })
        ));
        assert!(build_max_severity_profile(&e, &cap(0.1), &tuning(), Side::Right).is_ok());
    }

    #[test]
    fn terminal_heading_cancels() {
        for rho_max in [0.01, 0.0245, 0.1] {
            let p = build_max_severity_profile(&ego(), &cap(rho_max), &tuning(), Side::Left).unwrap();
            assert!(p.heading_at(p.t(9)).abs() < 1e-12, "{rho_max}");
            assert!(p.max_curvature_rate() <= 0.2 * (1.0 + 1e-9));
            assert!(p.max_abs_curvature() <= rho_max * (1.0 + 1e-12));
        }
    }

    #[test]
    fn counter_steer_plateau_when_curvature_is_low() {
        // with i_sb small the counter-steer curvature is too low and needs t6→t7
        let t = PathTuning { i_sb: 0.3, ..tuning() };
        let p = build_max_severity_profile(&ego(), &cap(0.03), &t, Side::Left).unwrap();
        assert!(p.t(7) > p.t(6));
        assert_relative_eq!(p.breakpoints[6].rho, -0.3 * 0.03, max_relative = 1e-12);
        assert!(p.heading_at(p.t(9)).abs() < 1e-12);
    }

    #[test]
    fn offset_run() {
        let t = PathTuning { y_offset: 1.0, ..tuning() };
        let p = build_max_severity_profile(&ego(), &cap(0.03), &t, Side::Left).unwrap();
        let expect = 1.0 / (20.0 * 0.2f64.sin());
        assert_relative_eq!(p.t(5) - p.t(4), expect, max_relative = 1e-12);
    }

    #[test]
    fn right_is_mirror_of_left() {
        let mut e = ego();
        e.yaw_rate = 0.05;
        e.psi = 0.03;
        let l = build_max_severity_profile(&e, &cap(0.03), &tuning(), Side::Left).unwrap();
        let mut em = e;
        em.yaw_rate = -e.yaw_rate;
        em.psi = -e.psi;
        let r = build_max_severity_profile(&em, &cap(0.03), &tuning(), Side::Right).unwrap();
        assert_eq!(r, l.mirrored());
    }

    #[test]
    fn prebraking_segment() {
        let mut c = cap(0.03);
        c.v_x_evasion = 17.0;
        let t = PathTuning { t_pb: 0.3, ..tuning() };
        let p = build_max_severity_profile(&ego(), &c, &t, Side::Left).unwrap();
        assert_eq!(p.t(1), 0.3);
        assert_eq!(p.breakpoints[0].v_x, 20.0);
        assert!(p.breakpoints[1..].iter().all(|b| b.v_x == 17.0));
        assert_relative_eq!(p.velocity_at(0.15), 18.5, max_relative = 1e-12);
        assert!(p.heading_at(p.t(9)).abs() < 1e-12);
    }

    #[test]
    fn initial_yaw_rate_sets_initial_curvature() {
        let mut e = ego();
        e.yaw_rate = 0.1;
        let p = build_max_severity_profile(&e, &cap(0.03), &tuning(), Side::Left).unwrap();
        assert_eq!(p.curvature_at(0.0), 0.1 / 20.0);
        assert!(p.heading_at(p.t(9)).abs() < 1e-12);
        assert!(p.max_abs_heading() <= 0.2 * (1.0 + 1e-9));
    }
}
