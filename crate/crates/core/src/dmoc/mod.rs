//! Discrete mechanics and optimal control for trajectory tracking.
//!
//! The forced discrete Euler-Lagrange equations, the discrete Legendre
//! boundary conditions and the discrete impact map become equality
//! constraints; the midpoint tracking cost is minimized by SQP.

mod cost;
mod problem;
mod sqp;
mod transcription;
mod warm;

pub use cost::discrete_cost;
pub use problem::{OCProblem, PhasePlan, WarmStart};
pub use sqp::{solve_sqp, SolverConfig, SolverStatus, SqpOutcome};
pub use transcription::{ConstraintKind, PhaseSpan, SparseJacobian, Transcription};
pub use warm::{tracking_control, warm_start_run, DEFAULT_TRACKING_BANDWIDTH};

use nalgebra::DVector;

use crate::error::Result;
use crate::integrator::{simulate_hybrid, DiscretePath, HybridOutcome, IntegratorConfig, ZeroControl};

/// Solution of one tracking problem.
#[derive(Debug, Clone, PartialEq)]
pub struct NLPResult {
    pub path: DiscretePath,
    pub objective: f64,
    /// Largest absolute constraint residual.
    pub residual: f64,
    pub stationarity: f64,
    pub multipliers: DVector<f64>,
    pub iterations: usize,
    pub status: SolverStatus,
    pub merit_steps: Vec<[f64; 2]>,
    /// Warm-start path the solver was seeded with.
    pub initial_guess: DiscretePath,
}

impl NLPResult {
    pub fn converged(&self) -> bool {
        self.status == SolverStatus::Converged
    }
}

/// Builds the NLP layout for `problem` with the given impact indices.
pub fn assemble_nlp(problem: &OCProblem, impacts: &[usize]) -> Result<Transcription> {
    Transcription::new(problem, impacts)
}

/// Warm-starts and solves `problem`.
pub fn solve(problem: &OCProblem, cfg: &SolverConfig) -> Result<NLPResult> {
    problem.validate()?;
    let warm = warm_start_run(problem)?;
    let impacts = match &problem.phase_plan {
        PhasePlan::Auto => warm.path.impact_indices(),
        PhasePlan::Fixed(j) => j.clone(),
    };
    let nlp = assemble_nlp(problem, &impacts)?;
    let z0 = nlp.encode(&warm.path);
    let out = solve_sqp(&nlp, z0, cfg)?;
    Ok(NLPResult {
        path: nlp.decode(&out.z),
        objective: out.objective,
        residual: out.constraint_violation,
        stationarity: out.stationarity,
        multipliers: out.multipliers,
        iterations: out.iterations,
        status: out.status,
        merit_steps: out.merit_steps,
        initial_guess: warm.path,
    })
}

/// Tracking cost `sum_k C_d` of a path, using the pair each interval owns.
pub fn path_cost(problem: &OCProblem, path: &DiscretePath) -> Result<f64> {
    (0..problem.n_steps)
        .map(|k| {
            let [a, b] = path.interval_pair(k);
            discrete_cost(problem, a, b, &path.control(k), k)
        })
        .sum()
}

/// Zero-control simulation over the problem horizon.
///
/// A crashed run is extended to the full horizon by holding the crash
/// configuration, so its cost and tracking error can be compared with a
/// controlled path on the same grid.
pub fn zero_control_baseline(problem: &OCProblem) -> Result<(DiscretePath, HybridOutcome)> {
    let cfg = IntegratorConfig::with_step(problem.h)?;
    let run = simulate_hybrid(&problem.params, &cfg, problem.q0, problem.qdot0, &mut ZeroControl, problem.n_steps)?;
    let mut path = run.path;
    let last = *path.configs.last().expect("a run holds its initial node");
    path.configs.resize(problem.n_steps + 1, last);
    path.controls.resize(problem.n_steps, crate::model::ControlInput::ZERO);
    Ok((path, run.outcome))
}
