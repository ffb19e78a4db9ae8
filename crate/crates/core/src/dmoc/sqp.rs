//! Dense SQP with an l1 merit function.
//!
//! Each iteration solves the regularized KKT system
//! `[H + dI, J^T; J, -eI] [d; lambda] = [-g; -c]` where `H` is the Hessian of
//! the Lagrangian: the exact cost Hessian plus the constraint curvature,
//! obtained by central differences of the analytic `J^T lambda`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, WalkerError};

use super::Transcription;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Bound on `max |c_i|`.
    pub feas_tol: f64,
    /// Bound on `max |grad f + J^T lambda|` with least-squares multipliers.
    pub stat_tol: f64,
    pub armijo: f64,
    pub min_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iter: 200, feas_tol: 1e-8, stat_tol: 1e-6, armijo: 1e-4, min_step: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    /// Stalled with a constraint violation the linearization cannot reduce.
    Infeasible,
    LineSearchFailed,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIterations => "max_iterations",
            Self::Infeasible => "infeasible",
            Self::LineSearchFailed => "line_search_failed",
        }
    }
}

/// Raw outcome of the SQP iteration on a decision vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SqpOutcome {
    pub z: DVector<f64>,
    pub multipliers: DVector<f64>,
    pub objective: f64,
    pub constraint_violation: f64,
    pub stationarity: f64,
    pub iterations: usize,
    pub status: SolverStatus,
    /// l1 merit before and after every accepted step, both at the penalty
    /// weight used by that step.
    pub merit_steps: Vec<[f64; 2]>,
}

fn lagrangian_hessian(nlp: &Transcription, z: &DVector<f64>, lambda: &DVector<f64>) -> DMatrix<f64> {
    let n = z.len();
    let mut h = nlp.objective_hessian().clone();
    if lambda.amax() == 0.0 {
        return h;
    }
    let mut curv = DMatrix::zeros(n, n);
    let mut zp = z.clone();
    for j in 0..n {
        let step = 1e-6 * z[j].abs().max(1.0);
        zp[j] = z[j] + step;
        let plus = nlp.constraint_jacobian(&zp).transpose_mul_vec(lambda);
        zp[j] = z[j] - step;
        let minus = nlp.constraint_jacobian(&zp).transpose_mul_vec(lambda);
        zp[j] = z[j];
        curv.set_column(j, &((plus - minus) / (2.0 * step)));
    }
    h += 0.5 * (&curv + curv.transpose());
    h
}

/// Least-squares multipliers `argmin |g + J^T lambda|`.
fn least_squares_multipliers(jac: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let m = jac.nrows();
    if m == 0 {
        return DVector::zeros(0);
    }
    let mut jjt = jac * jac.transpose();
    let scale = jjt.diagonal().amax().max(1.0);
    for i in 0..m {
        jjt[(i, i)] += 1e-14 * scale;
    }
    let rhs = -(jac * g);
    jjt.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(m))
}

/// Minimum-norm correction `-J^T (J J^T)^-1 c`.
fn feasibility_correction(jac: &DMatrix<f64>, c: &DVector<f64>) -> Option<DVector<f64>> {
    let mut jjt = jac * jac.transpose();
    let scale = jjt.diagonal().amax().max(1.0);
    for i in 0..jjt.nrows() {
        jjt[(i, i)] += 1e-14 * scale;
    }
    jjt.lu().solve(c).map(|y| -(jac.transpose() * y))
}

/// Solves the KKT system. A near-singular pivot (below 1e-12 of the
/// Hessian scale) or a step of non-positive curvature adds a primal
/// Levenberg shift starting at 1e-8 and growing by 10.
fn kkt_step(
    hess: &DMatrix<f64>,
    jac: &DMatrix<f64>,
    g: &DVector<f64>,
    c: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = hess.nrows();
    let m = jac.nrows();
    let scale = hess.diagonal().amax().max(1.0);
    let mut shift = 0.0;
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-g));
    rhs.rows_mut(n, m).copy_from(&(-c));
    for _ in 0..30 {
        let mut kkt = DMatrix::zeros(n + m, n + m);
        kkt.view_mut((0, 0), (n, n)).copy_from(hess);
        for i in 0..n {
            kkt[(i, i)] += shift;
        }
        kkt.view_mut((n, 0), (m, n)).copy_from(jac);
        kkt.view_mut((0, n), (n, m)).copy_from(&jac.transpose());
        for i in 0..m {
            kkt[(n + i, n + i)] = -1e-12 * scale;
        }
        let lu = kkt.lu();
        let pivots_ok = lu.u().diagonal().iter().all(|p| p.abs() > 1e-12 * scale);
        if pivots_ok {
            if let Some(sol) = lu.solve(&rhs) {
                let d = sol.rows(0, n).into_owned();
                let lambda = sol.rows(n, m).into_owned();
                let curvature = d.dot(&(hess * &d)) + shift * d.norm_squared();
                if d.iter().all(|v| v.is_finite()) && curvature >= 1e-10 * scale * d.norm_squared() {
                    return Some((d, lambda));
                }
            }
        }
        shift = if shift == 0.0 { 1e-8 * scale } else { shift * 10.0 };
    }
    None
}

/// Runs SQP on `nlp` from `z0`.
pub fn solve_sqp(nlp: &Transcription, z0: DVector<f64>, cfg: &SolverConfig) -> Result<SqpOutcome> {
    if z0.len() != nlp.n_vars() {
        return Err(WalkerError::ContractViolation(format!(
            "initial guess has {} entries, layout needs {}",
            z0.len(),
            nlp.n_vars()
        )));
    }
    if !z0.iter().all(|v| v.is_finite()) {
        return Err(WalkerError::ContractViolation("initial guess is not finite".into()));
    }
    let mut z = z0;
    let mut mu: f64 = 1.0;
    let mut lambda = DVector::zeros(nlp.n_constraints());
    let mut merit_steps = Vec::new();
    let mut status = SolverStatus::MaxIterations;
    let mut iterations = 0;

    let merit = |z: &DVector<f64>, mu: f64| -> (f64, f64, f64) {
        let f = nlp.objective(z);
        let c1 = nlp.constraints(z).lp_norm(1);
        (f + mu * c1, f, c1)
    };

    loop {
        let c = nlp.constraints(&z);
        let jac = nlp.constraint_jacobian(&z).to_dense();
        let g = nlp.objective_gradient(&z);
        let lambda_ls = least_squares_multipliers(&jac, &g);
        let stationarity = (&g + jac.transpose() * &lambda_ls).amax();
        let violation = c.amax();
        if violation <= cfg.feas_tol && stationarity <= cfg.stat_tol {
            status = SolverStatus::Converged;
            lambda = lambda_ls;
            break;
        }
        if iterations >= cfg.max_iter {
            lambda = lambda_ls;
            break;
        }
        iterations += 1;

        let multiplier_estimate = if lambda.amax() > 0.0 { &lambda } else { &lambda_ls };
        let hess = lagrangian_hessian(nlp, &z, multiplier_estimate);
        let Some((d, lambda_qp)) = kkt_step(&hess, &jac, &g, &c) else {
            status = SolverStatus::Infeasible;
            lambda = lambda_ls;
            break;
        };
        mu = mu.max(1.5 * lambda_qp.amax() + 1e-3);

        let (phi0, _, c1) = merit(&z, mu);
        let slope = g.dot(&d) - mu * c1;
        let mut alpha = 1.0;
        let mut accepted = None;
        let trial = &z + &d;
        if merit(&trial, mu).0 <= phi0 + cfg.armijo * slope {
            accepted = Some(trial);
        } else {
            // second-order correction on the full step
            let c_trial = nlp.constraints(&trial);
            if let Some(corr) = feasibility_correction(&jac, &c_trial) {
                let soc = &trial + corr;
                if merit(&soc, mu).0 <= phi0 + cfg.armijo * slope {
                    accepted = Some(soc);
                }
            }
        }
        while accepted.is_none() {
            alpha *= 0.5;
            if alpha < cfg.min_step {
                break;
            }
            let trial = &z + alpha * &d;
            if merit(&trial, mu).0 <= phi0 + cfg.armijo * alpha * slope {
                accepted = Some(trial);
            }
        }
        let Some(next) = accepted else {
            status = if violation > cfg.feas_tol && d.amax() < 1e-12 {
                SolverStatus::Infeasible
            } else {
                SolverStatus::LineSearchFailed
            };
            lambda = lambda_ls;
            break;
        };
        // steps this small leave merit and iterate unchanged to rounding
        let tiny = (&next - &z).amax() <= 1e-15 * z.amax().max(1.0);
        z = next;
        lambda = lambda_qp;
        merit_steps.push([phi0, merit(&z, mu).0]);
        if tiny && violation <= cfg.feas_tol {
            status = SolverStatus::LineSearchFailed;
            break;
        }
    }

    let c = nlp.constraints(&z);
    let jac = nlp.constraint_jacobian(&z).to_dense();
    let g = nlp.objective_gradient(&z);
    let lambda_ls = least_squares_multipliers(&jac, &g);
    Ok(SqpOutcome {
        objective: nlp.objective(&z),
        constraint_violation: c.amax(),
        stationarity: (&g + jac.transpose() * &lambda_ls).amax(),
        multipliers: if status == SolverStatus::Converged { lambda } else { lambda_ls },
        z,
        iterations,
        status,
        merit_steps,
    })
}
