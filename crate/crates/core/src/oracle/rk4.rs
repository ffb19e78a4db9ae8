use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Result, WalkerError};
use crate::model::{forced_dynamics, impact_map, ControlInput, ReducedState, WalkerParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub h_fine: f64,
    /// Bisection stops once the bracketing time interval is this short.
    pub event_tolerance: f64,
    pub impact_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { h_fine: 1e-4, event_tolerance: 1e-10, impact_cap: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousEvent {
    Impact { t: f64, pre: ReducedState, post: ReducedState },
    Crash { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousRun {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    pub events: Vec<ContinuousEvent>,
}

impl ContinuousRun {
    pub fn last(&self) -> &ReducedState {
        self.states.last().expect("a run holds at least its initial state")
    }
}

fn rk4(params: &WalkerParams, s: &ReducedState, u: &ControlInput, dt: f64) -> ReducedState {
    let f = |s: &ReducedState| {
        let acc = forced_dynamics(params, s, u);
        [s.xdot, s.thetadot, acc[0], acc[1]]
    };
    let add = |s: &ReducedState, k: &[f64; 4], c: f64| ReducedState {
        x: s.x + c * k[0],
        theta: s.theta + c * k[1],
        xdot: s.xdot + c * k[2],
        thetadot: s.thetadot + c * k[3],
    };
    let k1 = f(s);
    let k2 = f(&add(s, &k1, 0.5 * dt));
    let k3 = f(&add(s, &k2, 0.5 * dt));
    let k4 = f(&add(s, &k3, dt));
    let mut out = *s;
    let upd = |i: usize| dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    out.x += upd(0);
    out.theta += upd(1);
    out.xdot += upd(2);
    out.thetadot += upd(3);
    out
}

/// Locates the first sub-step time at which `g` changes sign by bisection.
fn locate(
    params: &WalkerParams,
    s: &ReducedState,
    u: &ControlInput,
    dt: f64,
    tol: f64,
    g: impl Fn(&ReducedState) -> f64,
) -> Result<(f64, ReducedState)> {
    let (mut lo, mut hi) = (0.0, dt);
    if g(s) <= 0.0 || g(&rk4(params, s, u, dt)) > 0.0 {
        return Err(WalkerError::EventLocation(format!("guard function does not change sign on a step of {dt}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(&rk4(params, s, u, mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((hi, rk4(params, s, u, hi)))
}

/// Integrates the hybrid continuous dynamics with fixed-step RK4 up to `t_end`.
///
/// `force(t, state)` is the continuous generalized control force, held over
/// each fine step. Events fire on crossings: `theta` falling through `-a`
/// (impact) or rising through `pi/2` (crash). They are located by
/// bisection; an impact applies the continuous impact map and integrates the
/// remainder of the step, a crash ends the run. A motion that never crosses
/// either level (for instance a libration about `theta = pi`) runs unguarded.
pub fn integrate_continuous(
    params: &WalkerParams,
    initial: ReducedState,
    mut force: impl FnMut(f64, &ReducedState) -> ControlInput,
    t_end: f64,
    cfg: &OracleConfig,
) -> Result<ContinuousRun> {
    let h_fine = cfg.h_fine;
    if !(h_fine.is_finite() && h_fine > 0.0) {
        return Err(invalid("h_fine", "must be > 0"));
    }
    if !(cfg.event_tolerance.is_finite() && cfg.event_tolerance > 0.0) {
        return Err(invalid("event_tolerance", "must be > 0"));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(invalid("t_end", "must be >= 0"));
    }
    if !initial.is_finite() {
        return Err(invalid("initial state", "must be finite"));
    }
    let a = params.a();
    let mut run = ContinuousRun { times: vec![0.0], states: vec![initial], events: Vec::new() };
    let mut t = 0.0;
    let mut s = initial;
    let mut impacts = 0;
    while t < t_end - 1e-12 {
        let mut dt = h_fine.min(t_end - t);
        let u = force(t, &s);
        let mut next = rk4(params, &s, &u, dt);
        if next.theta >= FRAC_PI_2 && s.theta < FRAC_PI_2 {
            let (tau, at) = locate(params, &s, &u, dt, cfg.event_tolerance, |q| FRAC_PI_2 - q.theta)?;
            run.times.push(t + tau);
            run.states.push(at);
            run.events.push(ContinuousEvent::Crash { t: t + tau });
            return Ok(run);
        }
        if next.theta <= -a && s.theta > -a {
            if impacts >= cfg.impact_cap {
                return Err(WalkerError::ZenoGuard { cap: cfg.impact_cap, step: run.times.len() });
            }
            impacts += 1;
            let (tau, mut pre) = locate(params, &s, &u, dt, cfg.event_tolerance, |q| q.theta + a)?;
            pre.theta = -a;
            let post = impact_map(params, &pre)?;
            run.events.push(ContinuousEvent::Impact { t: t + tau, pre, post });
            dt -= tau;
            t += tau;
            next = if dt > 0.0 { rk4(params, &post, &force(t, &post), dt) } else { post };
        }
        t += dt;
        s = next;
        run.times.push(t);
        run.states.push(s);
    }
    Ok(run)
}
