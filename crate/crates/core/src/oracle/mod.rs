//! Independent references for testing: a fixed-step RK4 integrator of the
//! continuous hybrid dynamics, finite-difference derivative checks and an
//! exhaustive search for tiny tracking problems.

mod brute;
mod fd;
mod rk4;

pub use brute::{brute_force_small_nlp, BruteForceConfig, BruteForceResult};
pub use fd::{fd_check, fd_gradient, fd_jacobian, FdReport, FD_SCALE};
pub use rk4::{integrate_continuous, ContinuousEvent, ContinuousRun, OracleConfig};
