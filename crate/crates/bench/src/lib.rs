//! Fixtures shared by the benchmarks.

use std::f64::consts::FRAC_PI_6;

use walker_core::dmoc::{OCProblem, PhasePlan, WarmStart};
use walker_core::model::{Config, ReferenceTrajectory, ReferenceXForm, WalkerParams};

/// The tracking scenario: 80 steps of 0.1 s, weights `(0.1, 100, 1)`,
/// initial velocity enforced and a free terminal state.
pub fn tracking_scenario() -> OCProblem {
    let params = WalkerParams::standard();
    let reference = ReferenceTrajectory::from_initial(
        params.com_radius(),
        params.a(),
        0.0,
        0.0,
        1.0,
        -0.08,
        8.0,
        ReferenceXForm::CosOffset,
    )
    .expect("valid reference");
    OCProblem {
        params,
        n_steps: 80,
        h: 0.1,
        epsilon: 0.1,
        eta: 100.0,
        rho: 1.0,
        q0: Config::new(0.0, FRAC_PI_6),
        qdot0: Config::new(1.0, 0.1),
        enforce_initial_velocity: true,
        q_final: None,
        qdot_final: None,
        reference,
        phase_plan: PhasePlan::Auto,
        warm_start: WarmStart::Auto,
    }
}

/// Initial state whose zero-control motion impacts once in the first second.
pub fn impacting_start() -> (Config, Config) {
    (Config::new(0.0, 0.0), Config::new(1.0, -1.0))
}
