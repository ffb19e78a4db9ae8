//! Midpoint discrete Lagrangian, discrete forces and their derivatives.
//!
//! Everything is expressed per interval `(q0, q1)`. The discrete
//! Euler-Lagrange residual at a node is assembled from the `D1` row of the
//! interval to its right and the `D2` row of the interval to its left.

use nalgebra::{Matrix2, Matrix4x2, Vector2};

use crate::model::{
    friction_force, legendre, potential_energy, Config, ControlInput, Covector, ReducedState, WalkerParams,
};

/// Midpoint discrete Lagrangian `h L((q0 + q1)/2, (q1 - q0)/h)`.
pub fn discrete_lagrangian(params: &WalkerParams, q0: Config, q1: Config, h: f64) -> f64 {
    let mid = q0.midpoint(q1);
    let dx = q1.x - q0.x;
    let dth = q1.theta - q0.theta;
    params.mass() / (2.0 * h) * dx * dx + params.angular_inertia(mid.theta) / (2.0 * h) * dth * dth
        - h * potential_energy(params, mid)
}

/// Partial derivatives of one interval's discrete Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianSlopes {
    /// `D1 L_d(q0, q1)`.
    pub d1: Covector,
    /// `D2 L_d(q0, q1)`.
    pub d2: Covector,
}

pub fn lagrangian_slopes(params: &WalkerParams, q0: Config, q1: Config, h: f64) -> LagrangianSlopes {
    let m = params.mass();
    let r = params.com_radius();
    let mr2 = m * r * r;
    let dx = q1.x - q0.x;
    let dth = q1.theta - q0.theta;
    let (s, c) = (0.5 * (q0.theta + q1.theta)).sin_cos();
    let j = params.angular_inertia(0.5 * (q0.theta + q1.theta));
    let (sin_a, cos_a) = params.alpha().sin_cos();

    let grav_x = 0.5 * h * m * params.g() * sin_a;
    let grav_th = 0.5 * h * m * params.g() * r * cos_a * s;
    let curvature = mr2 * s * c / (2.0 * h) * dth * dth;

    LagrangianSlopes {
        d1: Covector::new(-m / h * dx + grav_x, -j / h * dth + curvature + grav_th),
        d2: Covector::new(m / h * dx + grav_x, j / h * dth + curvature + grav_th),
    }
}

pub fn d1_ld(params: &WalkerParams, q0: Config, q1: Config, h: f64) -> Covector {
    lagrangian_slopes(params, q0, q1, h).d1
}

pub fn d2_ld(params: &WalkerParams, q0: Config, q1: Config, h: f64) -> Covector {
    lagrangian_slopes(params, q0, q1, h).d2
}

/// Discrete friction forces of one interval.
///
/// The midpoint rule evaluates the continuous friction once, at the
/// midpoint configuration and divided-difference velocity, so both members
/// coincide; `f_minus` acts on `q0` and `f_plus` on `q1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteForcePair {
    pub f_minus: Covector,
    pub f_plus: Covector,
}

pub fn discrete_forces(params: &WalkerParams, q0: Config, q1: Config, h: f64) -> DiscreteForcePair {
    let state = ReducedState::from_parts(q0.midpoint(q1), q0.velocity_to(q1, h));
    let f = 0.5 * h * friction_force(params, &state);
    DiscreteForcePair { f_minus: f, f_plus: f }
}

/// Forced slopes of one interval: `D1 L_d + F_d^-` and `D2 L_d + F_d^+`,
/// stacked as a 4-vector, with the Jacobian with respect to `(x0, theta0, x1, theta1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalTerms {
    pub left: Covector,
    pub right: Covector,
    /// Rows: left x, left theta, right x, right theta. Columns: x0, theta0, x1, theta1.
    pub jacobian: nalgebra::Matrix4<f64>,
}

impl IntervalTerms {
    /// Block of `left` with respect to `q0` (`first == true`) or `q1`.
    pub fn left_block(&self, first: bool) -> Matrix2<f64> {
        let c = if first { 0 } else { 2 };
        self.jacobian.fixed_view::<2, 2>(0, c).into_owned()
    }

    pub fn right_block(&self, first: bool) -> Matrix2<f64> {
        let c = if first { 0 } else { 2 };
        self.jacobian.fixed_view::<2, 2>(2, c).into_owned()
    }
}

pub fn interval_terms(params: &WalkerParams, q0: Config, q1: Config, h: f64) -> IntervalTerms {
    let m = params.mass();
    let r = params.com_radius();
    let mr2 = m * r * r;
    let kappa = params.kappa();
    let dx = q1.x - q0.x;
    let dth = q1.theta - q0.theta;
    let mid = 0.5 * (q0.theta + q1.theta);
    let (s, c) = mid.sin_cos();
    let cos2 = (2.0 * mid).cos();
    let j = params.angular_inertia(mid);
    let cos_a = params.alpha().cos();

    let slopes = lagrangian_slopes(params, q0, q1, h);
    let forces = discrete_forces(params, q0, q1, h);

    // Conservative part.
    let mut jac = nalgebra::Matrix4::<f64>::zeros();
    let grav = 0.25 * h * m * params.g() * r * cos_a * c;
    let quad = mr2 * cos2 / (4.0 * h) * dth * dth;
    let lin = 2.0 * mr2 * s * c / h * dth;
    // left x
    jac[(0, 0)] = m / h;
    jac[(0, 2)] = -m / h;
    // left theta
    jac[(1, 1)] = j / h - lin + quad + grav;
    jac[(1, 3)] = -j / h + quad + grav;
    // right x
    jac[(2, 0)] = -m / h;
    jac[(2, 2)] = m / h;
    // right theta
    jac[(3, 1)] = -j / h + quad + grav;
    jac[(3, 3)] = j / h + lin + quad + grav;

    // Friction: f = (h/2) F(mid, divided difference), shared by both rows.
    if kappa != 0.0 {
        let omega = dth / h;
        let w = dx / h + r * omega * c;
        let dw = Vector2::new(1.0 / h, 0.0);
        let dw_x = [-dw[0], dw[0]];
        let dw_th = [-r * c / h - 0.5 * r * omega * s, r * c / h - 0.5 * r * omega * s];
        let k = -0.5 * h * kappa;
        let mut df = Matrix4x2::<f64>::zeros();
        // columns of df are (f_x, f_theta); rows are (x0, theta0, x1, theta1)
        for side in 0..2 {
            df[(2 * side, 0)] = k * dw_x[side];
            df[(2 * side + 1, 0)] = k * dw_th[side];
            df[(2 * side, 1)] = k * r * c * dw_x[side];
            df[(2 * side + 1, 1)] = k * r * (-0.5 * s * w + c * dw_th[side]);
        }
        for col in 0..4 {
            for comp in 0..2 {
                jac[(comp, col)] += df[(col, comp)];
                jac[(2 + comp, col)] += df[(col, comp)];
            }
        }
    }

    IntervalTerms { left: slopes.d1 + forces.f_minus, right: slopes.d2 + forces.f_plus, jacobian: jac }
}

/// Forced discrete Euler-Lagrange residual at node `k` with controls.
pub fn del_residual(
    params: &WalkerParams,
    q_prev: Config,
    q: Config,
    q_next: Config,
    u_prev: &ControlInput,
    u: &ControlInput,
    h: f64,
) -> Covector {
    let left = lagrangian_slopes(params, q, q_next, h).d1 + discrete_forces(params, q, q_next, h).f_minus;
    let right = lagrangian_slopes(params, q_prev, q, h).d2 + discrete_forces(params, q_prev, q, h).f_plus;
    left + right + u_prev.as_covector() + u.as_covector()
}

/// Initial forced discrete Legendre condition
/// `D2 L(q0, qdot0) + D1 L_d(q0, q1) + F_d^-(q0, q1) + u0`.
pub fn initial_velocity_residual(
    params: &WalkerParams,
    q0: Config,
    qdot0: Config,
    q1: Config,
    u0: &ControlInput,
    h: f64,
) -> Covector {
    legendre(params, &ReducedState::from_parts(q0, qdot0)) + interval_terms(params, q0, q1, h).left + u0.as_covector()
}

/// Terminal forced discrete Legendre condition
/// `D2 L(qN, qdotN) - D2 L_d(qN-1, qN) - F_d^+(qN-1, qN) - uN-1`.
///
/// The control enters with the same sign as the discrete force it is
/// bundled with, so the momentum matches the one a further step would use.
pub fn terminal_velocity_residual(
    params: &WalkerParams,
    q_prev: Config,
    q_n: Config,
    qdot_n: Config,
    u_last: &ControlInput,
    h: f64,
) -> Covector {
    legendre(params, &ReducedState::from_parts(q_n, qdot_n))
        - interval_terms(params, q_prev, q_n, h).right
        - u_last.as_covector()
}

/// Momentum carried into `q1` by the interval `(q0, q1)`:
/// `D2 L_d + F_d^+ + u`.
pub fn forward_momentum(params: &WalkerParams, q0: Config, q1: Config, u: &ControlInput, h: f64) -> Covector {
    interval_terms(params, q0, q1, h).right + u.as_covector()
}

/// Velocity recovered from a momentum by inverting the continuous Legendre map at `q`.
pub fn velocity_from_momentum(params: &WalkerParams, q: Config, p: Covector) -> Config {
    Config::new(p[0] / params.mass(), p[1] / params.angular_inertia(q.theta))
}

/// Energy of the state reconstructed from the discrete momentum at node `k`.
pub fn discrete_energy(params: &WalkerParams, q0: Config, q1: Config, u: &ControlInput, h: f64) -> f64 {
    let p = forward_momentum(params, q0, q1, u, h);
    let v = velocity_from_momentum(params, q1, p);
    crate::model::energy(params, &ReducedState::from_parts(q1, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_6;

    fn params() -> WalkerParams {
        WalkerParams::standard()
    }

    #[test]
    fn lagrangian_examples() {
        let p = params();
        let h = 0.1;
        let mgr = p.mass() * p.g() * p.com_radius();
        let l = discrete_lagrangian(&p, Config::default(), Config::default(), h);
        assert!((l + h * mgr).abs() < 1e-15);
        let l = discrete_lagrangian(&p, Config::default(), Config::new(h, 0.0), h);
        assert!((l - (h * p.mass() / 2.0 - h * mgr)).abs() < 1e-15);
    }

    #[test]
    fn lagrangian_matches_continuous_quadrature() {
        let p = params();
        let h = 0.1;
        let (q0, q1) = (Config::new(0.0, FRAC_PI_6), Config::new(0.1, FRAC_PI_6 - 0.01));
        let mid = ReducedState::from_parts(q0.midpoint(q1), q0.velocity_to(q1, h));
        let continuous = h * (crate::model::kinetic_energy(&p, &mid) - potential_energy(&p, mid.config()));
        // Independent hand evaluation of the closed form.
        let thm = FRAC_PI_6 - 0.005;
        let closed = 0.01 / (2.0 * h) + (0.5 + thm.sin().powi(2)) * 1e-4 / (2.0 * h) - h * 9.8 * thm.cos();
        let ld = discrete_lagrangian(&p, q0, q1, h);
        assert!((ld - continuous).abs() < 1e-14);
        assert!((ld - closed).abs() < 1e-14);
    }

    #[test]
    fn uniform_translation_slopes() {
        let p = params();
        let h = 0.1;
        let (q0, q1) = (Config::new(0.3, 0.0), Config::new(0.45, 0.0));
        let d1 = d1_ld(&p, q0, q1, h);
        assert!((d1[0] + p.mass() * 0.15 / h).abs() < 1e-12);
        // Cyclic x: D1 L_d(q1, q2) + D2 L_d(q0, q1) vanishes on a constant-velocity path.
        let q2 = Config::new(0.6, 0.0);
        assert!((d1_ld(&p, q1, q2, h)[0] + d2_ld(&p, q0, q1, h)[0]).abs() < 1e-12);
    }

    #[test]
    fn force_examples() {
        let p = params();
        let h = 0.1;
        let frictionless = p.with_friction(0.0).unwrap();
        let f = discrete_forces(&frictionless, Config::new(0.0, 0.2), Config::new(0.5, 0.1), h);
        assert_eq!(f.f_minus, Covector::zeros());
        assert_eq!(f.f_plus, Covector::zeros());
        let q = Config::new(1.0, 0.4);
        let f = discrete_forces(&p, q, q, h);
        assert_eq!(f.f_minus, Covector::zeros());

        // Midpoint velocity (1, 0) at theta = pi/6: F_x = -0.2, F_theta = -0.2 cos(pi/6).
        let f = discrete_forces(&p, Config::new(0.0, FRAC_PI_6), Config::new(0.1, FRAC_PI_6), h);
        assert!((f.f_minus[0] - 0.05 * -0.2).abs() < 1e-15);
        assert!((f.f_minus[1] - 0.05 * -0.2 * FRAC_PI_6.cos()).abs() < 1e-15);
        assert_eq!(f.f_minus, f.f_plus);
    }

    #[test]
    fn residual_examples() {
        let p = params().with_friction(0.0).unwrap();
        let h = 0.05;
        let z = ControlInput::ZERO;
        let q = Config::new(0.7, 0.0);
        assert!(del_residual(&p, q, q, q, &z, &z, h).norm() < 1e-14);
        let r = del_residual(&p, Config::new(0.0, 0.0), Config::new(0.1, 0.0), Config::new(0.2, 0.0), &z, &z, h);
        assert!(r[0].abs() < 1e-13);
    }

    #[test]
    fn controls_enter_linearly() {
        let p = params();
        let h = 0.1;
        let (a, b, c) = (Config::new(0.0, 0.3), Config::new(0.1, 0.28), Config::new(0.2, 0.25));
        let base = del_residual(&p, a, b, c, &ControlInput::ZERO, &ControlInput::ZERO, h);
        let with = del_residual(&p, a, b, c, &ControlInput::new(0.1, -0.2), &ControlInput::new(0.3, 0.5), h);
        assert!((with - base - Covector::new(0.4, 0.3)).norm() < 1e-14);
    }
}
