use std::f64::consts::FRAC_PI_2;

use crate::dmoc::{discrete_cost, OCProblem};
use crate::error::{Result, WalkerError};
use crate::integrator::{interval_terms, DiscretePath};
use crate::model::{legendre, Config, ControlInput, ReducedState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceConfig {
    /// Half-width of the initial search box in every coordinate.
    pub half_width: f64,
    /// Upper bound on grid points per sweep.
    pub budget: usize,
    /// Stop zooming once the box half-width is below this.
    pub resolution: f64,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self { half_width: 1.0, budget: 200_000, resolution: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub objective: f64,
    pub path: DiscretePath,
    pub evaluations: usize,
}

/// Free configurations of a tiny problem, in node order.
fn free_nodes(problem: &OCProblem) -> Vec<usize> {
    let n = problem.n_steps;
    let last = if problem.q_final.is_some() { n - 1 } else { n };
    (1..=last).collect()
}

/// Objective of the configurations `free`, with controls eliminated by the
/// initial Legendre condition and the DEL equations; `None` when a node
/// leaves the impact-free domain.
fn eliminated(problem: &OCProblem, free: &[f64]) -> Option<(f64, DiscretePath)> {
    let params = &problem.params;
    let h = problem.h;
    let n = problem.n_steps;
    let mut configs = Vec::with_capacity(n + 1);
    configs.push(problem.q0);
    for pair in free.chunks(2) {
        configs.push(Config::new(pair[0], pair[1]));
    }
    if let Some(q) = problem.q_final {
        configs.push(q);
    }
    if configs.iter().any(|q| q.theta >= FRAC_PI_2 || q.theta <= -params.a()) {
        return None;
    }
    let terms: Vec<_> = (0..n).map(|k| interval_terms(params, configs[k], configs[k + 1], h)).collect();
    let mut controls = Vec::with_capacity(n);
    let u0 = -(legendre(params, &ReducedState::from_parts(problem.q0, problem.qdot0)) + terms[0].left);
    controls.push(ControlInput::new(u0[0], u0[1]));
    for k in 1..n {
        let u = -(terms[k].left + terms[k - 1].right) - controls[k - 1].as_covector();
        controls.push(ControlInput::new(u[0], u[1]));
    }
    let mut cost = 0.0;
    for k in 0..n {
        cost += discrete_cost(problem, configs[k], configs[k + 1], &controls[k], k).ok()?;
    }
    cost.is_finite().then(|| (cost, DiscretePath { h, configs, controls, impacts: Vec::new() }))
}

/// Exhaustive grid search with zooming for tracking problems of at most
/// three intervals, without impacts and with the initial velocity enforced.
///
/// The search box starts centered on the straight line from `q0` to `q_N`
/// (or on `q0 + t qdot0` when `q_N` is free) and is halved around the best
/// grid point until its half-width reaches `cfg.resolution`.
pub fn brute_force_small_nlp(problem: &OCProblem, cfg: &BruteForceConfig) -> Result<BruteForceResult> {
    problem.validate()?;
    if problem.n_steps > 3 {
        return Err(WalkerError::ContractViolation(format!(
            "brute force handles at most 3 intervals, got {}",
            problem.n_steps
        )));
    }
    if !problem.enforce_initial_velocity || problem.qdot_final.is_some() {
        return Err(WalkerError::ContractViolation(
            "brute force needs an enforced initial velocity and a free terminal velocity".into(),
        ));
    }
    let nodes = free_nodes(problem);
    let dim = 2 * nodes.len();
    let n = problem.n_steps as f64;
    let mut center: Vec<f64> = nodes
        .iter()
        .flat_map(|&k| {
            let s = k as f64 / n;
            let q = match problem.q_final {
                Some(qf) => Config::new(
                    problem.q0.x + s * (qf.x - problem.q0.x),
                    problem.q0.theta + s * (qf.theta - problem.q0.theta),
                ),
                None => Config::new(
                    problem.q0.x + k as f64 * problem.h * problem.qdot0.x,
                    problem.q0.theta + k as f64 * problem.h * problem.qdot0.theta,
                ),
            };
            [q.x, q.theta]
        })
        .collect();

    let mut points = 2;
    while (points + 1usize).pow(dim as u32) <= cfg.budget {
        points += 1;
    }
    let zoom_points = points.min(7);
    let mut half = cfg.half_width;
    let mut best: Option<(f64, DiscretePath)> = None;
    let mut evaluations = 0;
    let mut sweep = points;
    let mut z = vec![0.0; dim];
    loop {
        let total = sweep.pow(dim as u32);
        let mut improved_center = center.clone();
        for idx in 0..total {
            let mut rem = idx;
            for (d, zd) in z.iter_mut().enumerate() {
                let i = rem % sweep;
                rem /= sweep;
                *zd = center[d] + half * (2.0 * i as f64 / (sweep - 1) as f64 - 1.0);
            }
            evaluations += 1;
            if let Some((cost, path)) = eliminated(problem, &z) {
                if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    improved_center.copy_from_slice(&z);
                    best = Some((cost, path));
                }
            }
        }
        if best.is_none() {
            return Err(WalkerError::EmptyFeasibleGrid);
        }
        center = improved_center;
        if half <= cfg.resolution {
            break;
        }
        // a grid cell is 2 half / (sweep - 1); keep the best cell's neighbors
        half = (2.0 * half / (sweep - 1) as f64).max(cfg.resolution * 0.5);
        sweep = zoom_points;
    }
    let (objective, path) = best.expect("checked above");
    Ok(BruteForceResult { objective, path, evaluations })
}
