//! Propositional engine: unit propagation, satisfiability and (projected)
//! model counting.

pub mod count;
pub mod propagate;
pub mod solver;

pub use count::{count_models, projected_count, BigCount};
pub use propagate::{unit_propagate, PartialAssignment, Propagation};
pub use solver::{solve, solve_with, SatResult, Solver};
