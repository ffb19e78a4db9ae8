use crate::error::Result;
use crate::model::{Config, ControlInput, ReferenceSample};

use super::OCProblem;

/// Midpoint discrete tracking cost of interval `k`.
///
/// The reference is sampled at `t = h (2k + 1) / 2`; only `u_k` enters.
pub fn discrete_cost(problem: &OCProblem, q0: Config, q1: Config, u: &ControlInput, k: usize) -> Result<f64> {
    let reference = problem.reference.midpoint_sample(k, problem.h)?;
    Ok(interval_cost(problem, q0, q1, u, &reference))
}

pub(crate) fn interval_cost(
    problem: &OCProblem,
    q0: Config,
    q1: Config,
    u: &ControlInput,
    reference: &ReferenceSample,
) -> f64 {
    let h = problem.h;
    let mid = q0.midpoint(q1);
    let vel = q0.velocity_to(q1, h);
    0.5 * h
        * (problem.epsilon * u.norm_sq()
            + problem.eta * ((mid.x - reference.x).powi(2) + (mid.theta - reference.theta).powi(2))
            + problem.rho * ((vel.x - reference.xdot).powi(2) + (vel.theta - reference.thetadot).powi(2)))
}
