#![allow(dead_code)]

use std::f64::consts::FRAC_PI_6;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use walker_core::dmoc::{OCProblem, PhasePlan, WarmStart};
use walker_core::model::{Config, ReferenceTrajectory, ReferenceXForm, WalkerParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Configuration away from the guards.
pub fn random_config(rng: &mut ChaCha8Rng) -> Config {
    Config::new(rng.gen_range(-2.0..2.0), rng.gen_range(-0.45..1.3))
}

pub fn nearby(rng: &mut ChaCha8Rng, q: Config, spread: f64) -> Config {
    Config::new(q.x + rng.gen_range(-spread..spread), q.theta + rng.gen_range(-spread..spread))
}

pub fn scenario_reference() -> ReferenceTrajectory {
    ReferenceTrajectory::from_initial(1.0, FRAC_PI_6, 0.0, 0.0, 1.0, -0.08, 8.0, ReferenceXForm::CosOffset).unwrap()
}

/// The tracking scenario: 80 steps of 0.1 s, initial velocity enforced,
/// free terminal state.
pub fn scenario() -> OCProblem {
    OCProblem {
        params: WalkerParams::standard(),
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
        reference: scenario_reference(),
        phase_plan: PhasePlan::Auto,
        warm_start: WarmStart::Auto,
    }
}

/// Initial state whose zero-control motion has one impact and no crash
/// during the first second.
pub fn impacting_start() -> (Config, Config) {
    (Config::new(0.0, 0.0), Config::new(1.0, -1.0))
}

/// Initial state whose zero-control motion has no event during the first second.
pub fn quiet_start() -> (Config, Config) {
    (Config::new(0.0, 0.1), Config::new(1.0, -0.3))
}
