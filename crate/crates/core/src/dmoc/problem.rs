use crate::error::{invalid, Result};
use crate::model::{Config, ReferenceTrajectory, WalkerParams};

/// Where the impacts of the optimized trajectory fall on the grid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PhasePlan {
    /// Read the impact indices off the warm-start simulation.
    #[default]
    Auto,
    /// Impact on the grid pair `(j, j + 1)` for every listed `j`.
    Fixed(Vec<usize>),
}

/// How the initial guess is produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum WarmStart {
    /// Zero-control hybrid simulation; if it crashes, fall back to the
    /// tracking feedback simulation.
    #[default]
    Auto,
    ZeroControl,
    /// Hybrid simulation under a PD tracking law with gravity compensation.
    Tracking {
        bandwidth: f64,
    },
    /// Caller-supplied path.
    Path(crate::integrator::DiscretePath),
}

/// One discrete-mechanics tracking problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OCProblem {
    pub params: WalkerParams,
    pub n_steps: usize,
    pub h: f64,
    /// Control weight.
    pub epsilon: f64,
    /// Position-tracking weight.
    pub eta: f64,
    /// Velocity-tracking weight.
    pub rho: f64,
    pub q0: Config,
    /// Initial velocity; always used by the warm start, enforced through the
    /// discrete Legendre condition when `enforce_initial_velocity` is set.
    pub qdot0: Config,
    pub enforce_initial_velocity: bool,
    /// Fixed terminal configuration, if any.
    pub q_final: Option<Config>,
    /// Enforced terminal velocity, if any.
    pub qdot_final: Option<Config>,
    pub reference: ReferenceTrajectory,
    pub phase_plan: PhasePlan,
    pub warm_start: WarmStart,
}

impl OCProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(invalid("epsilon", "must be > 0"));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(invalid("eta", "must be >= 0"));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(invalid("rho", "must be >= 0"));
        }
        if self.n_steps < 2 {
            return Err(invalid("n_steps", "must be at least 2"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(invalid("h", "must be > 0"));
        }
        if !self.q0.is_finite() || !self.qdot0.is_finite() {
            return Err(invalid("q0", "initial data must be finite"));
        }
        if let ReferenceTrajectory::Sampled(s) = &self.reference {
            if s.len() < self.n_steps {
                return Err(invalid(
                    "reference",
                    format!("sampled reference covers {} intervals, need {}", s.len(), self.n_steps),
                ));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.h
    }
}
