//! Multi-phase transcription of the tracking problem into an NLP.
//!
//! The horizon is split at every planned impact index `j`. The stride before
//! the impact owns nodes up to `j + 1` (its last pair is the pre-impact pair)
//! and the stride after it starts from the post-impact pair at `(j, j + 1)`.
//! Decision vector layout: all free configurations, stride by stride, then
//! the controls `u_0 .. u_N-1`.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Result, WalkerError};
use crate::integrator::{grid_impact, grid_impact_jacobian, interval_terms, DiscretePath, ImpactRecord};
use crate::model::{legendre, Config, ControlInput, ReducedState, ReferenceSample};

use super::OCProblem;

/// Jacobian stored as `(row, col, value)` triplets; duplicates add up.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseJacobian {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseJacobian {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Structural nonzeros (entries that are exactly zero are kept, they
    /// belong to the pattern).
    pub fn pattern(&self) -> std::collections::BTreeSet<(usize, usize)> {
        self.entries.iter().map(|&(r, c, _)| (r, c)).collect()
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.rows);
        for &(r, c, val) in &self.entries {
            out[r] += val * v[c];
        }
        out
    }

    pub fn transpose_mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.cols);
        for &(r, c, val) in &self.entries {
            out[c] += val * v[r];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpan {
    pub start: usize,
    pub end: usize,
}

/// What a block of constraint rows enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    InitialVelocity,
    Del { node: usize },
    ImpactLink { index: usize },
    TerminalVelocity,
}

#[derive(Debug, Clone)]
struct LinearResidual {
    weight: f64,
    coefs: Vec<(usize, f64)>,
    constant: f64,
}

/// The assembled NLP: objective `sum_k C_d` and equality constraints.
#[derive(Debug, Clone)]
pub struct Transcription {
    problem: OCProblem,
    impacts: Vec<usize>,
    phases: Vec<PhaseSpan>,
    columns: Vec<Vec<Option<usize>>>,
    n_config_vars: usize,
    blocks: Vec<(ConstraintKind, usize)>,
    n_constraints: usize,
    cost_terms: Vec<LinearResidual>,
    cost_hessian: DMatrix<f64>,
}

impl Transcription {
    pub fn new(problem: &OCProblem, impacts: &[usize]) -> Result<Self> {
        problem.validate()?;
        let n = problem.n_steps;
        for (i, &j) in impacts.iter().enumerate() {
            if j == 0 || j >= n {
                return Err(WalkerError::Configuration(format!("impact index {j} outside 1..={}", n - 1)));
            }
            if i > 0 && j <= impacts[i - 1] {
                return Err(WalkerError::Configuration("impact indices must be strictly increasing".into()));
            }
        }

        let mut phases = Vec::with_capacity(impacts.len() + 1);
        let mut start = 0;
        for &j in impacts {
            phases.push(PhaseSpan { start, end: j + 1 });
            start = j;
        }
        phases.push(PhaseSpan { start, end: n });

        let last = phases.len() - 1;
        let mut columns = Vec::with_capacity(phases.len());
        let mut next = 0;
        for (p, span) in phases.iter().enumerate() {
            let mut cols = Vec::with_capacity(span.end - span.start + 1);
            for i in span.start..=span.end {
                let fixed = (p == 0 && i == 0) || (p == last && i == n && problem.q_final.is_some());
                if fixed {
                    cols.push(None);
                } else {
                    cols.push(Some(next));
                    next += 2;
                }
            }
            columns.push(cols);
        }

        let mut blocks = Vec::new();
        let mut rows = 0;
        for (p, span) in phases.iter().enumerate() {
            if p == 0 && problem.enforce_initial_velocity {
                blocks.push((ConstraintKind::InitialVelocity, rows));
                rows += 2;
            }
            if p > 0 {
                blocks.push((ConstraintKind::ImpactLink { index: span.start }, rows));
                rows += 4;
            }
            for node in span.start + 1..span.end {
                blocks.push((ConstraintKind::Del { node }, rows));
                rows += 2;
            }
        }
        if problem.qdot_final.is_some() {
            blocks.push((ConstraintKind::TerminalVelocity, rows));
            rows += 2;
        }

        let mut t = Self {
            problem: problem.clone(),
            impacts: impacts.to_vec(),
            phases,
            columns,
            n_config_vars: next,
            blocks,
            n_constraints: rows,
            cost_terms: Vec::new(),
            cost_hessian: DMatrix::zeros(0, 0),
        };
        t.build_cost()?;
        Ok(t)
    }

    pub fn problem(&self) -> &OCProblem {
        &self.problem
    }

    pub fn impacts(&self) -> &[usize] {
        &self.impacts
    }

    pub fn phases(&self) -> &[PhaseSpan] {
        &self.phases
    }

    pub fn constraint_blocks(&self) -> &[(ConstraintKind, usize)] {
        &self.blocks
    }

    pub fn n_vars(&self) -> usize {
        self.n_config_vars + 2 * self.problem.n_steps
    }

    pub fn n_config_vars(&self) -> usize {
        self.n_config_vars
    }

    pub fn n_control_vars(&self) -> usize {
        2 * self.problem.n_steps
    }

    pub fn n_constraints(&self) -> usize {
        self.n_constraints
    }

    pub fn control_column(&self, k: usize) -> usize {
        self.n_config_vars + 2 * k
    }

    /// Stride owning interval `k` (the last one starting at or before `k`).
    fn interval_phase(&self, k: usize) -> usize {
        self.phases.iter().rposition(|s| s.start <= k).unwrap()
    }

    fn column(&self, p: usize, i: usize) -> Option<usize> {
        self.columns[p][i - self.phases[p].start]
    }

    fn fixed_config(&self, p: usize, i: usize) -> Config {
        if p == 0 && i == 0 {
            self.problem.q0
        } else {
            self.problem.q_final.expect("only q0 and q_final are fixed")
        }
    }

    fn config(&self, z: &DVector<f64>, p: usize, i: usize) -> Config {
        match self.column(p, i) {
            Some(c) => Config::new(z[c], z[c + 1]),
            None => self.fixed_config(p, i),
        }
    }

    fn control(&self, z: &DVector<f64>, k: usize) -> ControlInput {
        let c = self.control_column(k);
        ControlInput::new(z[c], z[c + 1])
    }

    fn build_cost(&mut self) -> Result<()> {
        let pb = &self.problem;
        let h = pb.h;
        let mut terms = Vec::with_capacity(6 * pb.n_steps);
        for k in 0..pb.n_steps {
            let reference: ReferenceSample = pb.reference.midpoint_sample(k, h)?;
            let p = self.interval_phase(k);
            let ends = [(self.column(p, k), k), (self.column(p, k + 1), k + 1)];
            for (comp, (target_pos, target_vel)) in
                [(0usize, (reference.x, reference.xdot)), (1, (reference.theta, reference.thetadot))]
            {
                for (weight, coef, target) in
                    [(pb.eta, [0.5, 0.5], target_pos), (pb.rho, [-1.0 / h, 1.0 / h], target_vel)]
                {
                    let mut lin = LinearResidual { weight, coefs: Vec::with_capacity(2), constant: -target };
                    for (side, (col, node)) in ends.iter().enumerate() {
                        match col {
                            Some(c) => lin.coefs.push((c + comp, coef[side])),
                            None => {
                                let q = self.fixed_config(p, *node);
                                lin.constant += coef[side] * if comp == 0 { q.x } else { q.theta };
                            }
                        }
                    }
                    terms.push(lin);
                }
            }
            let uc = self.control_column(k);
            for comp in 0..2 {
                terms.push(LinearResidual { weight: pb.epsilon, coefs: vec![(uc + comp, 1.0)], constant: 0.0 });
            }
        }
        let n = self.n_vars();
        let mut hess = DMatrix::zeros(n, n);
        for t in &terms {
            for &(i, ci) in &t.coefs {
                for &(j, cj) in &t.coefs {
                    hess[(i, j)] += h * t.weight * ci * cj;
                }
            }
        }
        self.cost_terms = terms;
        self.cost_hessian = hess;
        Ok(())
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        let half_h = 0.5 * self.problem.h;
        self.cost_terms
            .iter()
            .map(|t| {
                let r = t.constant + t.coefs.iter().map(|&(c, v)| v * z[c]).sum::<f64>();
                half_h * t.weight * r * r
            })
            .sum()
    }

    pub fn objective_gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let h = self.problem.h;
        let mut g = DVector::zeros(self.n_vars());
        for t in &self.cost_terms {
            let r = t.constant + t.coefs.iter().map(|&(c, v)| v * z[c]).sum::<f64>();
            for &(c, v) in &t.coefs {
                g[c] += h * t.weight * r * v;
            }
        }
        g
    }

    /// Exact Hessian of the objective (the objective is quadratic).
    pub fn objective_hessian(&self) -> &DMatrix<f64> {
        &self.cost_hessian
    }

    pub fn constraints(&self, z: &DVector<f64>) -> DVector<f64> {
        self.evaluate(z, false).0
    }

    pub fn constraint_jacobian(&self, z: &DVector<f64>) -> SparseJacobian {
        self.evaluate(z, true).1.expect("jacobian requested")
    }

    fn evaluate(&self, z: &DVector<f64>, want_jac: bool) -> (DVector<f64>, Option<SparseJacobian>) {
        let pb = &self.problem;
        let params = &pb.params;
        let h = pb.h;
        let n = pb.n_steps;
        let mut c = DVector::zeros(self.n_constraints);
        let mut entries = Vec::new();

        let put = |entries: &mut Vec<(usize, usize, f64)>, row: usize, col: Option<usize>, block: &Matrix2<f64>| {
            if let Some(col) = col {
                for i in 0..2 {
                    for j in 0..2 {
                        entries.push((row + i, col + j, block[(i, j)]));
                    }
                }
            }
        };
        let identity = Matrix2::identity();

        for &(kind, row) in &self.blocks {
            match kind {
                ConstraintKind::InitialVelocity => {
                    let q0 = self.config(z, 0, 0);
                    let q1 = self.config(z, 0, 1);
                    let t = interval_terms(params, q0, q1, h);
                    let r = legendre(params, &ReducedState::from_parts(q0, pb.qdot0))
                        + t.left
                        + self.control(z, 0).as_covector();
                    c.fixed_rows_mut::<2>(row).copy_from(&r);
                    if want_jac {
                        put(&mut entries, row, self.column(0, 1), &t.left_block(false));
                        put(&mut entries, row, Some(self.control_column(0)), &identity);
                    }
                }
                ConstraintKind::Del { node } => {
                    let p = self.phases.iter().rposition(|s| s.start < node).unwrap();
                    let (qa, qb, qc) =
                        (self.config(z, p, node - 1), self.config(z, p, node), self.config(z, p, node + 1));
                    let right = interval_terms(params, qa, qb, h);
                    let left = interval_terms(params, qb, qc, h);
                    let r = left.left
                        + right.right
                        + self.control(z, node - 1).as_covector()
                        + self.control(z, node).as_covector();
                    c.fixed_rows_mut::<2>(row).copy_from(&r);
                    if want_jac {
                        put(&mut entries, row, self.column(p, node - 1), &right.right_block(true));
                        let mid = left.left_block(true) + right.right_block(false);
                        put(&mut entries, row, self.column(p, node), &mid);
                        put(&mut entries, row, self.column(p, node + 1), &left.left_block(false));
                        put(&mut entries, row, Some(self.control_column(node - 1)), &identity);
                        put(&mut entries, row, Some(self.control_column(node)), &identity);
                    }
                }
                ConstraintKind::ImpactLink { index } => {
                    let p = self.phases.iter().position(|s| s.start == index && index != 0).unwrap();
                    let pre = [self.config(z, p - 1, index), self.config(z, p - 1, index + 1)];
                    let post = [self.config(z, p, index), self.config(z, p, index + 1)];
                    let mapped = grid_impact(params, pre);
                    let r = [
                        post[0].x - mapped[0].x,
                        post[0].theta - mapped[0].theta,
                        post[1].x - mapped[1].x,
                        post[1].theta - mapped[1].theta,
                    ];
                    for (i, v) in r.iter().enumerate() {
                        c[row + i] = *v;
                    }
                    if want_jac {
                        let jac = grid_impact_jacobian(params, pre);
                        for side in 0..2 {
                            if let Some(col) = self.column(p, index + side) {
                                entries.push((row + 2 * side, col, 1.0));
                                entries.push((row + 2 * side + 1, col + 1, 1.0));
                            }
                            if let Some(col) = self.column(p - 1, index + side) {
                                for i in 0..4 {
                                    for j in 0..2 {
                                        entries.push((row + i, col + j, -jac[(i, 2 * side + j)]));
                                    }
                                }
                            }
                        }
                    }
                }
                ConstraintKind::TerminalVelocity => {
                    let p = self.phases.len() - 1;
                    let qdot = pb.qdot_final.expect("terminal block implies terminal velocity");
                    let (qa, qn) = (self.config(z, p, n - 1), self.config(z, p, n));
                    let t = interval_terms(params, qa, qn, h);
                    let r = legendre(params, &ReducedState::from_parts(qn, qdot))
                        - t.right
                        - self.control(z, n - 1).as_covector();
                    c.fixed_rows_mut::<2>(row).copy_from(&r);
                    if want_jac {
                        put(&mut entries, row, self.column(p, n - 1), &(-t.right_block(true)));
                        let mr2 = params.mass() * params.com_radius().powi(2);
                        let mut dmass = Matrix2::zeros();
                        dmass[(1, 1)] = mr2 * (2.0 * qn.theta).sin() * qdot.theta;
                        put(&mut entries, row, self.column(p, n), &(dmass - t.right_block(false)));
                        put(&mut entries, row, Some(self.control_column(n - 1)), &(-identity));
                    }
                }
            }
        }
        let jac = want_jac.then(|| SparseJacobian { rows: self.n_constraints, cols: self.n_vars(), entries });
        (c, jac)
    }

    /// Packs a path into a decision vector for this layout.
    ///
    /// Impact pairs are taken from the path's impact records when the path
    /// has an impact at the same index; otherwise the stored configurations
    /// are used. A path shorter than the horizon is padded with its last node.
    pub fn encode(&self, path: &DiscretePath) -> DVector<f64> {
        let mut z = DVector::zeros(self.n_vars());
        let last = path.configs.len() - 1;
        let node = |i: usize| path.configs[i.min(last)];
        for (p, span) in self.phases.iter().enumerate() {
            for i in span.start..=span.end {
                let Some(col) = self.column(p, i) else { continue };
                let mut q = node(i);
                // pre-impact pair at the end of this stride
                if p + 1 < self.phases.len() {
                    let j = self.phases[p + 1].start;
                    if i >= j {
                        if let Some(rec) = path.impact_at(j) {
                            q = rec.pre[i - j];
                        }
                    }
                }
                if p > 0 && i <= span.start + 1 {
                    if let Some(rec) = path.impact_at(span.start) {
                        q = rec.post[i - span.start];
                    }
                }
                z[col] = q.x;
                z[col + 1] = q.theta;
            }
        }
        for k in 0..self.problem.n_steps {
            let u = path.control(k);
            let c = self.control_column(k);
            z[c] = u.ux;
            z[c + 1] = u.utheta;
        }
        z
    }

    /// Unpacks a decision vector into a path with impact records.
    pub fn decode(&self, z: &DVector<f64>) -> DiscretePath {
        let n = self.problem.n_steps;
        let mut configs = vec![Config::default(); n + 1];
        for (p, span) in self.phases.iter().enumerate() {
            let upto = if p + 1 < self.phases.len() { self.phases[p + 1].start - 1 } else { n };
            for (i, slot) in configs.iter_mut().enumerate().take(upto + 1).skip(span.start) {
                *slot = self.config(z, p, i);
            }
        }
        let impacts = self
            .phases
            .iter()
            .enumerate()
            .skip(1)
            .map(|(p, span)| {
                let j = span.start;
                ImpactRecord {
                    index: j,
                    pre: [self.config(z, p - 1, j), self.config(z, p - 1, j + 1)],
                    post: [self.config(z, p, j), self.config(z, p, j + 1)],
                }
            })
            .collect();
        DiscretePath { h: self.problem.h, configs, controls: (0..n).map(|k| self.control(z, k)).collect(), impacts }
    }
}
