//! Exact linear programming.

mod guided;
mod rational;
mod simplex;

pub use guided::solve_lp;
pub use rational::Rational;
pub use simplex::{solve_lp_exact, Constraint, LinearProgram, LpError, LpSolution, Relation, Sense};
