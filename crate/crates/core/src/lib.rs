//! Trust-region Newton optimisation with a binarised sub-problem.
//!
//! The main entry points are [`quanco_minimize`], which minimises the
//! quadratic model over a grid inside a rectangular trust region by solving
//! a QUBO, and [`trn_minimize`], a classical spherical trust-region Newton
//! method used as a baseline. Costs implement [`DifferentiableCost`]; box
//! constraints are removed with [`TransformedCost`]. The [`biogas`] module
//! provides a family of benchmark problems with a known global minimum.

// `!(a > b)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biogas;
pub mod bounds;
mod error;
pub mod gradcheck;
pub mod ising;
pub mod linalg;
pub mod model;
pub mod quanco;
pub mod subproblem;
pub mod trace;
pub mod trn;

pub use bounds::{BoundSpec, TransformedCost};
pub use error::{Error, Result};
pub use ising::{solver_registry, ExactSolver, IsingSolver, SaConfig, SimulatedAnnealing, SolveResult, SolverParams};
pub use model::{taylor_at, DifferentiableCost, Point, QuadraticCost, QuadraticModel, RhoMode};
pub use quanco::{quanco_minimize, quanco_minimize_with, QuancoConfig, SolverSpec};
pub use subproblem::{build_qubo, decode_step, Qubo, TrustBox};
pub use trace::{ConvergenceReason, IterationRecord, OptimizationTrace};
pub use trn::{solve_sphere_subproblem, trn_minimize, TrnConfig};
