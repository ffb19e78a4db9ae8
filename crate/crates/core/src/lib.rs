//! Slipping passive walker as a hybrid, holonomically constrained, forced
//! Lagrangian system.
//!
//! * [`model`]: continuous restricted dynamics, friction, energy, impact map
//!   and the piecewise reference trajectory.
//! * [`integrator`]: midpoint forced variational integrator, Newton
//!   stepping and hybrid execution with a discrete impact map.
//! * [`dmoc`]: discrete mechanics and optimal control; the tracking problem
//!   transcribed into an equality-constrained NLP and solved by SQP.
//! * [`oracle`]: independent checks (fixed-step RK4 with event location,
//!   finite-difference derivative checks, brute-force search on tiny
//!   problems).

// Range checks are written as negated comparisons so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dmoc;
pub mod error;
pub mod integrator;
pub mod model;
pub mod oracle;

pub use dmoc::{NLPResult, OCProblem, SolverConfig, SolverStatus};
pub use error::{Result, WalkerError};
pub use integrator::{DiscretePath, HybridOutcome, HybridRun, ImpactRecord, IntegratorConfig};
pub use model::{Config, ControlInput, Covector, ReducedState, ReferenceTrajectory, WalkerParams};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
