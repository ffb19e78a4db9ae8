//! Continuous-time walker physics on the constraint submanifold.
//!
//! The walker is a two-mass inverted pendulum whose foot slides on the ground
//! against viscous friction. Imposing `y = r cos(theta)` reduces the ambient
//! configuration `(x, y, theta)` to `(x, theta)`; everything here works in
//! those reduced coordinates.
//!
//! A nonzero ground slope `alpha` is supported by taking the potential
//! `V = m g (r cos(theta) cos(alpha) - x sin(alpha))`. At `alpha = 0` every
//! expression reduces to the flat-ground model.

mod reference;

pub use reference::{ReferencePhase, ReferenceSample, ReferenceTrajectory, ReferenceXForm};

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector2;

use crate::error::{invalid, Result, WalkerError};

/// Covector on the reduced configuration space, components along `dx` and `dtheta`.
pub type Covector = Vector2<f64>;

/// Maximum admissible `|theta + a|` for a state handed to an impact map.
pub const GUARD_TOLERANCE: f64 = 1e-10;

/// Composite constants of the two-mass leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composites {
    /// Total mass `m1 + m2`.
    pub mass: f64,
    /// Moment of inertia about the center of mass, `ell^2 m1 m2 / m`.
    pub inertia: f64,
    /// Foot to center-of-mass distance, `ell m2 / m`.
    pub com_radius: f64,
}

pub fn derive_composites(m1: f64, m2: f64, ell: f64) -> Result<Composites> {
    positive("m1", m1)?;
    positive("m2", m2)?;
    positive("ell", ell)?;
    let mass = m1 + m2;
    Ok(Composites { mass, inertia: ell * ell * m1 * m2 / mass, com_radius: ell * m2 / mass })
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Physical constants of the slipping walker.
///
/// Composite quantities are recomputed from the primitive ones on every
/// access so they can never drift out of sync.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerParams {
    m1: f64,
    m2: f64,
    ell: f64,
    g: f64,
    kappa: f64,
    a: f64,
    alpha: f64,
}

impl WalkerParams {
    pub fn new(m1: f64, m2: f64, ell: f64, g: f64, kappa: f64, a: f64) -> Result<Self> {
        derive_composites(m1, m2, ell)?;
        if !g.is_finite() {
            return Err(invalid("g", "must be finite"));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(invalid("kappa", format!("must be finite and >= 0, got {kappa}")));
        }
        if !(a.is_finite() && a > 0.0 && a < FRAC_PI_2) {
            return Err(invalid("a", format!("must lie in (0, pi/2), got {a}")));
        }
        Ok(Self { m1, m2, ell, g, kappa, a, alpha: 0.0 })
    }

    /// The walker used in the reproduction run: `m = 1`, `I = 0.5`, `r = 1`,
    /// `g = 9.8`, `kappa = 0.2`, `a = pi/6` on flat ground.
    pub fn standard() -> Self {
        Self::new(1.0 / 3.0, 2.0 / 3.0, 1.5, 9.8, 0.2, std::f64::consts::FRAC_PI_6)
            .expect("standard parameters are valid")
    }

    pub fn with_slope(mut self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha.abs() < FRAC_PI_2) {
            return Err(invalid("alpha", format!("must lie in (-pi/2, pi/2), got {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_friction(self, kappa: f64) -> Result<Self> {
        Self::new(self.m1, self.m2, self.ell, self.g, kappa, self.a)?.with_slope(self.alpha)
    }

    pub fn with_gravity(self, g: f64) -> Result<Self> {
        Self::new(self.m1, self.m2, self.ell, g, self.kappa, self.a)?.with_slope(self.alpha)
    }

    pub fn with_step_angle(self, a: f64) -> Result<Self> {
        Self::new(self.m1, self.m2, self.ell, self.g, self.kappa, a)?.with_slope(self.alpha)
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }
    pub fn m2(&self) -> f64 {
        self.m2
    }
    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    /// Step half-angle; the guard sits at `theta = -a`.
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mass(&self) -> f64 {
        self.m1 + self.m2
    }
    pub fn inertia(&self) -> f64 {
        self.ell * self.ell * self.m1 * self.m2 / self.mass()
    }
    pub fn com_radius(&self) -> f64 {
        self.ell * self.m2 / self.mass()
    }

    /// Angular entry of the (diagonal) reduced mass matrix, `I + m r^2 sin^2 theta`.
    pub fn angular_inertia(&self, theta: f64) -> f64 {
        let r = self.com_radius();
        let s = theta.sin();
        self.inertia() + self.mass() * r * r * s * s
    }
}

/// Reduced configuration `(x, theta)`. Also used for generalized velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub x: f64,
    pub theta: f64,
}

impl Config {
    pub const fn new(x: f64, theta: f64) -> Self {
        Self { x, theta }
    }

    pub fn midpoint(self, other: Config) -> Config {
        Config::new(0.5 * (self.x + other.x), 0.5 * (self.theta + other.theta))
    }

    /// Divided difference `(next - self) / h`.
    pub fn velocity_to(self, next: Config, h: f64) -> Config {
        Config::new((next.x - self.x) / h, (next.theta - self.theta) / h)
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.x, self.theta)
    }

    pub fn from_vector(v: Vector2<f64>) -> Self {
        Self::new(v[0], v[1])
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.theta.is_finite()
    }
}

/// Point of the reduced phase space, `(x, theta, xdot, thetadot)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState {
    pub x: f64,
    pub theta: f64,
    pub xdot: f64,
    pub thetadot: f64,
}

impl ReducedState {
    pub const fn new(x: f64, theta: f64, xdot: f64, thetadot: f64) -> Self {
        Self { x, theta, xdot, thetadot }
    }

    pub fn from_parts(q: Config, qdot: Config) -> Self {
        Self::new(q.x, q.theta, qdot.x, qdot.theta)
    }

    pub fn config(&self) -> Config {
        Config::new(self.x, self.theta)
    }

    pub fn velocity(&self) -> Config {
        Config::new(self.xdot, self.thetadot)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.theta.is_finite() && self.xdot.is_finite() && self.thetadot.is_finite()
    }
}

/// State in the ambient coordinates: center of mass `(x, y)`, foot
/// `(xbar, ybar)` and leg angle, with all velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedState {
    pub x: f64,
    pub y: f64,
    pub xbar: f64,
    pub ybar: f64,
    pub theta: f64,
    pub xdot: f64,
    pub ydot: f64,
    pub xbar_dot: f64,
    pub ybar_dot: f64,
    pub thetadot: f64,
}

impl EmbeddedState {
    pub fn embed(params: &WalkerParams, s: &ReducedState) -> Self {
        let r = params.com_radius();
        let (sin, cos) = s.theta.sin_cos();
        Self {
            x: s.x,
            y: r * cos,
            xbar: s.x - r * sin,
            ybar: 0.0,
            theta: s.theta,
            xdot: s.xdot,
            ydot: -r * sin * s.thetadot,
            xbar_dot: s.xdot - r * cos * s.thetadot,
            ybar_dot: 0.0,
            thetadot: s.thetadot,
        }
    }

    pub fn project(&self) -> ReducedState {
        ReducedState::new(self.x, self.theta, self.xdot, self.thetadot)
    }

    /// Holonomic constraint `y - r cos(theta)`.
    pub fn constraint_residual(&self, params: &WalkerParams) -> f64 {
        self.y - params.com_radius() * self.theta.cos()
    }
}

/// Generalized control force: `ux` along `dx`, `utheta` along `dtheta`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    pub ux: f64,
    pub utheta: f64,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput { ux: 0.0, utheta: 0.0 };

    pub const fn new(ux: f64, utheta: f64) -> Self {
        Self { ux, utheta }
    }

    pub fn as_covector(&self) -> Covector {
        Covector::new(self.ux, self.utheta)
    }

    pub fn norm_sq(&self) -> f64 {
        self.ux * self.ux + self.utheta * self.utheta
    }

    pub fn max_abs(&self) -> f64 {
        self.ux.abs().max(self.utheta.abs())
    }
}

/// Viscous foot friction `(F_x, F_theta)`; `F_theta = r cos(theta) F_x`.
pub fn friction_force(params: &WalkerParams, s: &ReducedState) -> Covector {
    let r = params.com_radius();
    let cos = s.theta.cos();
    let fx = -params.kappa() * (s.xdot + r * s.thetadot * cos);
    Covector::new(fx, r * cos * fx)
}

/// Accelerations `(xddot, thetaddot)` of the controlled restricted dynamics.
pub fn forced_dynamics(params: &WalkerParams, s: &ReducedState, u: &ControlInput) -> Vector2<f64> {
    let m = params.mass();
    let r = params.com_radius();
    let f = friction_force(params, s);
    let (sin, cos) = s.theta.sin_cos();
    let g = params.g();
    let (sin_a, cos_a) = params.alpha().sin_cos();
    let xddot = (f[0] + u.ux + m * g * sin_a) / m;
    let torque = f[1] + u.utheta + r * m * sin * (g * cos_a - r * s.thetadot * s.thetadot * cos);
    Vector2::new(xddot, torque / params.angular_inertia(s.theta))
}

/// Continuous Legendre transform `dL/dqdot`.
pub fn legendre(params: &WalkerParams, s: &ReducedState) -> Covector {
    Covector::new(params.mass() * s.xdot, params.angular_inertia(s.theta) * s.thetadot)
}

pub fn kinetic_energy(params: &WalkerParams, s: &ReducedState) -> f64 {
    let m = params.mass();
    let r = params.com_radius();
    let sin = s.theta.sin();
    0.5 * m * (s.xdot * s.xdot + r * r * sin * sin * s.thetadot * s.thetadot)
        + 0.5 * params.inertia() * s.thetadot * s.thetadot
}

pub fn potential_energy(params: &WalkerParams, q: Config) -> f64 {
    let (sin_a, cos_a) = params.alpha().sin_cos();
    params.mass() * params.g() * (params.com_radius() * q.theta.cos() * cos_a - q.x * sin_a)
}

/// Total energy `E_L = K_N + V`.
pub fn energy(params: &WalkerParams, s: &ReducedState) -> f64 {
    kinetic_energy(params, s) + potential_energy(params, s.config())
}

/// Rigid-hip leg exchange applied on the guard `theta = -a`.
///
/// The foot position and velocity are continuous across the impact, the leg
/// angle jumps by `2a` and the angular rate is scaled by `cos(2a)`.
pub fn impact_map(params: &WalkerParams, pre: &ReducedState) -> Result<ReducedState> {
    let a = params.a();
    if (pre.theta + a).abs() > GUARD_TOLERANCE || !pre.is_finite() {
        return Err(WalkerError::ContractViolation(format!(
            "impact map called off the guard: theta = {}, guard at {}",
            pre.theta, -a
        )));
    }
    let r = params.com_radius();
    let theta = pre.theta + 2.0 * a;
    let thetadot = (2.0 * a).cos() * pre.thetadot;
    let x = pre.x - r * (-a).sin() + r * theta.sin();
    let xdot = pre.xdot - r * pre.thetadot * (-a).cos() + r * thetadot * theta.cos();
    Ok(ReducedState::new(x, theta, xdot, thetadot))
}

/// Guard classification of a single state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardEvent {
    None,
    /// Leg angle at or past `-a`: a new step.
    Step,
    /// Leg angle reached `pi/2`: the walker fell backwards.
    Crash,
}

pub fn guards(params: &WalkerParams, theta: f64) -> GuardEvent {
    if theta >= FRAC_PI_2 {
        GuardEvent::Crash
    } else if theta <= -params.a() {
        GuardEvent::Step
    } else {
        GuardEvent::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn composites_of_standard_walker() {
        let c = derive_composites(1.0 / 3.0, 2.0 / 3.0, 1.5).unwrap();
        assert!(close(c.mass, 1.0, 1e-15));
        assert!(close(c.inertia, 0.5, 1e-15));
        assert!(close(c.com_radius, 1.0, 1e-15));
        let p = WalkerParams::standard();
        assert!(close(p.inertia(), 0.5, 1e-15) && close(p.com_radius(), 1.0, 1e-15));
        // Equal masses on a leg of length 2 give I = 4 * 0.25 / 1 = 1, not 0.5.
        let c = derive_composites(0.5, 0.5, 2.0).unwrap();
        assert_eq!((c.mass, c.inertia, c.com_radius), (1.0, 1.0, 1.0));
        let c = derive_composites(2.0, 1.0, 3.0).unwrap();
        assert!(close(c.mass, 3.0, 1e-15));
        assert!(close(c.inertia, 6.0, 1e-15));
        assert!(close(c.com_radius, 1.0, 1e-15));
    }

    #[test]
    fn degenerate_masses_rejected() {
        assert!(matches!(derive_composites(1.0, 0.0, 1.0), Err(WalkerError::InvalidParameter { name: "m2", .. })));
        assert!(derive_composites(-1.0, 1.0, 1.0).is_err());
        assert!(derive_composites(1.0, 1.0, f64::NAN).is_err());
        assert!(WalkerParams::new(1.0, 1.0, 1.0, 9.8, -0.1, 0.3).is_err());
        assert!(WalkerParams::new(1.0, 1.0, 1.0, 9.8, 0.1, FRAC_PI_2).is_err());
        assert!(WalkerParams::standard().with_slope(2.0).is_err());
    }

    #[test]
    fn friction_examples() {
        let p = WalkerParams::standard();
        assert_eq!(friction_force(&p, &ReducedState::new(3.0, 0.4, 0.0, 0.0)), Covector::zeros());
        let frictionless = p.with_friction(0.0).unwrap();
        assert_eq!(friction_force(&frictionless, &ReducedState::new(0.0, 0.2, 1.0, -3.0)), Covector::zeros());
        let f = friction_force(&p, &ReducedState::new(0.0, 0.0, 1.0, 0.1));
        assert!(close(f[0], -0.22, 1e-15));
        assert!(close(f[1], -0.22, 1e-15));
    }

    #[test]
    fn dynamics_examples() {
        let p = WalkerParams::standard();
        let acc = forced_dynamics(&p, &ReducedState::default(), &ControlInput::ZERO);
        assert_eq!(acc, Vector2::zeros());

        let p0 = p.with_friction(0.0).unwrap();
        let acc = forced_dynamics(&p0, &ReducedState::new(0.0, FRAC_PI_6, 2.5, 0.0), &ControlInput::ZERO);
        let s = FRAC_PI_6.sin();
        let expected = p0.com_radius() * p0.mass() * p0.g() * s / (p0.inertia() + s * s);
        assert_eq!(acc[0], 0.0);
        assert!(close(acc[1], expected, 1e-14));
    }

    #[test]
    fn energy_examples() {
        let p = WalkerParams::standard();
        assert!(close(energy(&p, &ReducedState::default()), 9.8, 1e-15));
        let e = energy(&p, &ReducedState::new(0.0, FRAC_PI_2, 2.0, 0.0));
        assert!(close(e, 2.0, 1e-14));
    }

    #[test]
    fn impact_examples() {
        let p = WalkerParams::standard();
        let a = p.a();
        let post = impact_map(&p, &ReducedState::new(0.3, -a, 1.5, 0.0)).unwrap();
        assert!(close(post.theta, a, 1e-15));
        assert_eq!(post.thetadot, 0.0);
        assert!(close(post.xdot, 1.5, 1e-15));
        assert!(close(post.x, 0.3 + 2.0 * a.sin(), 1e-15));

        let p4 = p.with_step_angle(FRAC_PI_4).unwrap();
        let post = impact_map(&p4, &ReducedState::new(0.0, -FRAC_PI_4, 0.0, -3.0)).unwrap();
        assert!(post.thetadot.abs() < 1e-15);

        assert!(matches!(
            impact_map(&p, &ReducedState::new(0.0, 0.1, 0.0, 0.0)),
            Err(WalkerError::ContractViolation(_))
        ));
    }

    #[test]
    fn impact_worked_example() {
        // a = pi/6, r = 1, thetadot- = -0.5, xdot- = 1, x- = 2.
        let p = WalkerParams::standard();
        let a = FRAC_PI_6;
        let pre = ReducedState::new(2.0, -a, 1.0, -0.5);
        let post = impact_map(&p, &pre).unwrap();
        // Hand evaluation: sin(pi/6) = 1/2, cos(pi/6) = sqrt(3)/2, cos(pi/3) = 1/2.
        let c = 3f64.sqrt() / 2.0;
        assert!(close(post.x, 3.0, 1e-15));
        assert!(close(post.theta, a, 1e-15));
        assert!(close(post.thetadot, -0.25, 1e-15));
        assert!(close(post.xdot, 1.0 + 0.5 * c - 0.25 * c, 1e-15));
        // Only the angular kinetic term sees the cos^2(2a) factor exactly.
        let i = p.inertia();
        assert!(close(0.5 * i * post.thetadot.powi(2), 0.5 * i * pre.thetadot.powi(2) * 0.25, 1e-15));
        let de = energy(&p, &post) - energy(&p, &pre);
        let dk_x = 0.5 * (post.xdot.powi(2) - pre.xdot.powi(2));
        let dk_rot = 0.5 * i * pre.thetadot.powi(2) * (0.25 - 1.0);
        let dk_coupling = 0.5 * (a.sin().powi(2)) * (post.thetadot.powi(2) - pre.thetadot.powi(2));
        assert!(close(de, dk_x + dk_rot + dk_coupling, 1e-13));
    }

    #[test]
    fn guard_classification() {
        let p = WalkerParams::standard();
        assert_eq!(guards(&p, 0.0), GuardEvent::None);
        assert_eq!(guards(&p, -p.a() - 1e-9), GuardEvent::Step);
        assert_eq!(guards(&p, FRAC_PI_2), GuardEvent::Crash);
    }

    #[test]
    fn embedding_respects_constraint() {
        let p = WalkerParams::standard();
        let s = ReducedState::new(1.3, -0.4, 0.7, 2.1);
        let e = EmbeddedState::embed(&p, &s);
        assert_eq!(e.ybar, 0.0);
        assert!(e.constraint_residual(&p).abs() < 1e-16);
        assert!(close(e.x, e.xbar + p.com_radius() * s.theta.sin(), 1e-15));
        assert_eq!(e.project(), s);
    }

    #[test]
    fn slope_enters_gravity_consistently() {
        let p = WalkerParams::standard().with_friction(0.0).unwrap().with_slope(0.1).unwrap();
        let s = ReducedState::new(0.0, 0.3, 0.0, 0.0);
        let acc = forced_dynamics(&p, &s, &ControlInput::ZERO);
        assert!(close(acc[0], 9.8 * 0.1f64.sin(), 1e-14));
    }
}
