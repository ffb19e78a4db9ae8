//! Midpoint forced variational integrator and its hybrid execution.

mod discrete;
mod path;

pub use discrete::{
    d1_ld, d2_ld, del_residual, discrete_energy, discrete_forces, discrete_lagrangian, forward_momentum,
    initial_velocity_residual, interval_terms, lagrangian_slopes, terminal_velocity_residual, velocity_from_momentum,
    DiscreteForcePair, IntervalTerms, LagrangianSlopes,
};
pub use path::{DiscretePath, ImpactRecord};

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Matrix4};

use crate::error::{invalid, Result, WalkerError};
use crate::model::{Config, ControlInput, Covector, ReducedState, WalkerParams, GUARD_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub h: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub impact_cap: usize,
}

impl IntegratorConfig {
    pub fn new(h: f64, newton_tol: f64, newton_max_iter: usize, impact_cap: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid("h", format!("must be > 0, got {h}")));
        }
        if !(newton_tol.is_finite() && newton_tol > 0.0) {
            return Err(invalid("newton_tol", format!("must be > 0, got {newton_tol}")));
        }
        if newton_max_iter == 0 {
            return Err(invalid("newton_max_iter", "must be at least 1"));
        }
        Ok(Self { h, newton_tol, newton_max_iter, impact_cap })
    }

    pub fn with_step(h: f64) -> Result<Self> {
        let d = Self::default();
        Self::new(h, d.newton_tol, d.newton_max_iter, d.impact_cap)
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { h: 0.1, newton_tol: 1e-10, newton_max_iter: 50, impact_cap: 10_000 }
    }
}

/// Number of grid steps covering `horizon`; the horizon must be an integer multiple of `h`.
pub fn steps_for_horizon(horizon: f64, h: f64) -> Result<usize> {
    let n = (horizon / h).round();
    if !(n >= 1.0) || ((n * h) - horizon).abs() > 1e-9 * horizon.abs().max(1.0) {
        return Err(invalid("horizon", format!("{horizon} is not a positive multiple of h = {h}")));
    }
    Ok(n as usize)
}

/// Newton iteration on a 2x2 system with an exact Jacobian.
fn newton2(
    seed: Config,
    cfg: &IntegratorConfig,
    mut eval: impl FnMut(Config) -> (Covector, Matrix2<f64>),
) -> Result<Config> {
    let mut q = seed;
    let mut res = Covector::zeros();
    for _ in 0..cfg.newton_max_iter {
        let (r, jac) = eval(q);
        res = r;
        if !r.iter().all(|v| v.is_finite()) {
            break;
        }
        if r.amax() <= cfg.newton_tol {
            return Ok(q);
        }
        let det = jac.determinant();
        let scale = jac.amax().powi(2).max(f64::MIN_POSITIVE);
        if det.abs() < 1e-14 * scale {
            return Err(WalkerError::SingularJacobian { step: 0, det });
        }
        let delta = jac.try_inverse().expect("nonsingular 2x2") * r;
        q = Config::new(q.x - delta[0], q.theta - delta[1]);
    }
    let (r, _) = eval(q);
    if r.amax() <= cfg.newton_tol {
        return Ok(q);
    }
    Err(WalkerError::StepFailure {
        step: 0,
        iterations: cfg.newton_max_iter,
        residual: if r.iter().all(|v| v.is_finite()) { r.amax() } else { res.amax().max(f64::INFINITY) },
    })
}

fn at_step(err: WalkerError, k: usize) -> WalkerError {
    match err {
        WalkerError::StepFailure { iterations, residual, .. } => {
            WalkerError::StepFailure { step: k, iterations, residual }
        }
        WalkerError::SingularJacobian { det, .. } => WalkerError::SingularJacobian { step: k, det },
        other => other,
    }
}

/// Solves the forced discrete Euler-Lagrange equation for `q_next`, seeded
/// with the linear extrapolation `2 q - q_prev`.
pub fn step(
    params: &WalkerParams,
    cfg: &IntegratorConfig,
    q_prev: Config,
    q: Config,
    u_prev: &ControlInput,
    u: &ControlInput,
) -> Result<Config> {
    let h = cfg.h;
    let back = interval_terms(params, q_prev, q, h).right + u_prev.as_covector() + u.as_covector();
    let seed = Config::new(2.0 * q.x - q_prev.x, 2.0 * q.theta - q_prev.theta);
    newton2(seed, cfg, |q_next| {
        let t = interval_terms(params, q, q_next, h);
        (t.left + back, t.left_block(false))
    })
}

/// Solves the initial forced discrete Legendre condition for `q1`.
pub fn init_from_velocity(
    params: &WalkerParams,
    cfg: &IntegratorConfig,
    q0: Config,
    qdot0: Config,
    u0: &ControlInput,
) -> Result<Config> {
    let h = cfg.h;
    let p0 = crate::model::legendre(params, &ReducedState::from_parts(q0, qdot0)) + u0.as_covector();
    let seed = Config::new(q0.x + h * qdot0.x, q0.theta + h * qdot0.theta);
    newton2(seed, cfg, |q1| {
        let t = interval_terms(params, q0, q1, h);
        (t.left + p0, t.left_block(false))
    })
}

/// Discrete impact map on a pair whose first element sits on the guard.
pub fn discrete_impact(params: &WalkerParams, pre: [Config; 2]) -> Result<[Config; 2]> {
    let a = params.a();
    if (pre[0].theta + a).abs() > GUARD_TOLERANCE || !pre[0].is_finite() || !pre[1].is_finite() {
        return Err(WalkerError::ContractViolation(format!(
            "discrete impact needs theta_0 = -a, got theta_0 = {} with a = {a}",
            pre[0].theta
        )));
    }
    Ok(impact_closed_form(params, pre, 2.0 * a + pre[0].theta))
}

fn impact_closed_form(params: &WalkerParams, pre: [Config; 2], theta0_post: f64) -> [Config; 2] {
    let a = params.a();
    let r = params.com_radius();
    let c2 = (2.0 * a).cos();
    let dth = pre[1].theta - pre[0].theta;
    let psi = a + 0.5 * c2 * dth;
    let spread = 0.5 * r * dth * (a.cos() - c2 * psi.cos());
    let lift = r * (a.sin() + psi.sin());
    [Config::new(pre[0].x + spread + lift, theta0_post), Config::new(pre[1].x - spread + lift, c2 * dth + a)]
}

/// Impact applied on the grid pair that brackets the guard.
///
/// The pair is translated in `theta` so that its first element sits exactly
/// on `-a` (its angular increment is kept) and then mapped by
/// [`discrete_impact`]. No sub-step event location is performed.
pub fn grid_impact(params: &WalkerParams, pre: [Config; 2]) -> [Config; 2] {
    let a = params.a();
    let shift = -a - pre[0].theta;
    let shifted = [Config::new(pre[0].x, -a), Config::new(pre[1].x, pre[1].theta + shift)];
    impact_closed_form(params, shifted, a)
}

/// Jacobian of [`grid_impact`] with respect to `(x0, theta0, x1, theta1)`.
pub fn grid_impact_jacobian(params: &WalkerParams, pre: [Config; 2]) -> Matrix4<f64> {
    let a = params.a();
    let r = params.com_radius();
    let c2 = (2.0 * a).cos();
    let dth = pre[1].theta - pre[0].theta;
    let psi = a + 0.5 * c2 * dth;
    let (sin_psi, cos_psi) = psi.sin_cos();
    let d_spread = 0.5 * r * (a.cos() - c2 * cos_psi) + 0.25 * r * dth * c2 * c2 * sin_psi;
    let d_lift = 0.5 * r * c2 * cos_psi;
    let mut jac = Matrix4::zeros();
    jac[(0, 0)] = 1.0;
    jac[(0, 1)] = -(d_spread + d_lift);
    jac[(0, 3)] = d_spread + d_lift;
    jac[(2, 2)] = 1.0;
    jac[(2, 1)] = -(-d_spread + d_lift);
    jac[(2, 3)] = -d_spread + d_lift;
    jac[(3, 1)] = -c2;
    jac[(3, 3)] = c2;
    jac
}

/// Source of the control applied on each interval during a simulation.
///
/// `state` is the node state at the start of interval `k`, with the velocity
/// recovered from the discrete momentum.
pub trait ControlSource {
    fn control(&mut self, k: usize, t_mid: f64, state: &ReducedState) -> ControlInput;
}

/// Zero control on every interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroControl;

impl ControlSource for ZeroControl {
    fn control(&mut self, _: usize, _: f64, _: &ReducedState) -> ControlInput {
        ControlInput::ZERO
    }
}

/// Open-loop sequence; intervals beyond its end get zero control.
#[derive(Debug, Clone, Copy)]
pub struct ControlSequence<'a>(pub &'a [ControlInput]);

impl ControlSource for ControlSequence<'_> {
    fn control(&mut self, k: usize, _: f64, _: &ReducedState) -> ControlInput {
        self.0.get(k).copied().unwrap_or(ControlInput::ZERO)
    }
}

impl<F> ControlSource for F
where
    F: FnMut(usize, f64, &ReducedState) -> ControlInput,
{
    fn control(&mut self, k: usize, t_mid: f64, state: &ReducedState) -> ControlInput {
        self(k, t_mid, state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HybridOutcome {
    Completed,
    /// The leg angle reached `pi/2` at node `step`; the path ends there.
    Crashed {
        step: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridRun {
    pub path: DiscretePath,
    pub outcome: HybridOutcome,
}

/// Runs the hybrid discrete flow for `n_steps` intervals.
///
/// After every implicit step the new pair is tested against the guard: when
/// `theta_k+1 <= -a < theta_k` the pair is replaced by its [`grid_impact`]
/// image and stepping continues from the post-impact pair. A node with
/// `theta >= pi/2` ends the run as a crash.
pub fn simulate_hybrid(
    params: &WalkerParams,
    cfg: &IntegratorConfig,
    q0: Config,
    qdot0: Config,
    controls: &mut dyn ControlSource,
    n_steps: usize,
) -> Result<HybridRun> {
    if !q0.is_finite() || !qdot0.is_finite() {
        return Err(invalid("initial state", "must be finite"));
    }
    let h = cfg.h;
    let mut path = DiscretePath {
        h,
        configs: Vec::with_capacity(n_steps + 1),
        controls: Vec::with_capacity(n_steps),
        impacts: Vec::new(),
    };
    path.configs.push(q0);
    if crate::model::guards(params, q0.theta) == crate::model::GuardEvent::Crash {
        return Ok(HybridRun { path, outcome: HybridOutcome::Crashed { step: 0 } });
    }
    if n_steps == 0 {
        return Ok(HybridRun { path, outcome: HybridOutcome::Completed });
    }

    let mut node_state = ReducedState::from_parts(q0, qdot0);
    for k in 0..n_steps {
        let u = controls.control(k, h * (k as f64 + 0.5), &node_state);
        let q_k = path.configs[k];
        let q_next = if k == 0 {
            init_from_velocity(params, cfg, q0, qdot0, &u)
        } else {
            step(params, cfg, path.configs[k - 1], q_k, &path.controls[k - 1], &u)
        }
        .map_err(|e| at_step(e, k + 1))?;
        path.controls.push(u);
        path.configs.push(q_next);

        if q_next.theta >= FRAC_PI_2 {
            return Ok(HybridRun { path, outcome: HybridOutcome::Crashed { step: k + 1 } });
        }
        if q_next.theta <= -params.a() && q_k.theta > -params.a() {
            if path.impacts.last().is_some_and(|i| i.index + 1 == k) {
                return Err(WalkerError::ContractViolation(format!(
                    "impacts on consecutive grid pairs at step {k}; reduce h"
                )));
            }
            if path.impacts.len() >= cfg.impact_cap {
                return Err(WalkerError::ZenoGuard { cap: cfg.impact_cap, step: k });
            }
            let pre = [q_k, q_next];
            let post = grid_impact(params, pre);
            path.configs[k] = post[0];
            path.configs[k + 1] = post[1];
            path.impacts.push(ImpactRecord { index: k, pre, post });
        }
        let pair = path.interval_pair(k);
        let p = forward_momentum(params, pair[0], pair[1], &u, h);
        node_state = ReducedState::from_parts(pair[1], velocity_from_momentum(params, pair[1], p));
    }
    Ok(HybridRun { path, outcome: HybridOutcome::Completed })
}

/// Iterates the discrete flow without guards, returning every node.
pub fn propagate_unguarded(
    params: &WalkerParams,
    cfg: &IntegratorConfig,
    q0: Config,
    qdot0: Config,
    n_steps: usize,
) -> Result<Vec<Config>> {
    let z = ControlInput::ZERO;
    let mut qs = Vec::with_capacity(n_steps + 1);
    qs.push(q0);
    if n_steps == 0 {
        return Ok(qs);
    }
    qs.push(init_from_velocity(params, cfg, q0, qdot0, &z).map_err(|e| at_step(e, 1))?);
    for k in 1..n_steps {
        let next = step(params, cfg, qs[k - 1], qs[k], &z, &z).map_err(|e| at_step(e, k + 1))?;
        qs.push(next);
    }
    Ok(qs)
}
