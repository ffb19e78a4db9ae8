use crate::error::Result;
use crate::integrator::{simulate_hybrid, HybridOutcome, HybridRun, IntegratorConfig, ZeroControl};
use crate::model::{friction_force, ControlInput, ReducedState, ReferenceTrajectory, WalkerParams};

use super::{OCProblem, WarmStart};

/// Default closed-loop bandwidth (rad/s) of the tracking warm start.
pub const DEFAULT_TRACKING_BANDWIDTH: f64 = 4.0;

/// Critically damped PD law with gravity and friction compensation, expressed
/// as a discrete force covector (`u_k ~ h/2 F`), aimed at the reference
/// sample the cost uses on interval `k`.
pub fn tracking_control(
    params: &WalkerParams,
    reference: &ReferenceTrajectory,
    bandwidth: f64,
    h: f64,
    k: usize,
    state: &ReducedState,
) -> ControlInput {
    let Ok(target) = reference.midpoint_sample(k, h) else {
        return ControlInput::ZERO;
    };
    let (kp, kd) = (bandwidth * bandwidth, 2.0 * bandwidth);
    let m = params.mass();
    let r = params.com_radius();
    let g = params.g();
    let (sin_a, cos_a) = params.alpha().sin_cos();
    let fric = friction_force(params, state);
    let ax = kp * (target.x - state.x) + kd * (target.xdot - state.xdot);
    let ath = kp * (target.theta - state.theta) + kd * (target.thetadot - state.thetadot);
    let fx = m * ax - fric[0] - m * g * sin_a;
    let gravity_torque = r * m * state.theta.sin() * (g * cos_a - r * state.thetadot.powi(2) * state.theta.cos());
    let fth = params.angular_inertia(state.theta) * ath - fric[1] - gravity_torque;
    ControlInput::new(0.5 * h * fx, 0.5 * h * fth)
}

/// Simulation used to seed the solver.
pub fn warm_start_run(problem: &OCProblem) -> Result<HybridRun> {
    let cfg = IntegratorConfig::with_step(problem.h)?;
    let sim = |source: &mut dyn crate::integrator::ControlSource| {
        simulate_hybrid(&problem.params, &cfg, problem.q0, problem.qdot0, source, problem.n_steps)
    };
    let tracking = |bandwidth: f64| {
        let mut law = |k: usize, _: f64, s: &ReducedState| {
            tracking_control(&problem.params, &problem.reference, bandwidth, problem.h, k, s)
        };
        sim(&mut law)
    };
    match &problem.warm_start {
        WarmStart::ZeroControl => sim(&mut ZeroControl),
        WarmStart::Tracking { bandwidth } => tracking(*bandwidth),
        WarmStart::Path(path) => Ok(HybridRun { path: path.clone(), outcome: HybridOutcome::Completed }),
        WarmStart::Auto => {
            let run = sim(&mut ZeroControl)?;
            if run.outcome == HybridOutcome::Completed {
                Ok(run)
            } else {
                tracking(DEFAULT_TRACKING_BANDWIDTH)
            }
        }
    }
}
