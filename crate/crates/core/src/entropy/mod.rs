//! Entropic terms, Shannon witnesses, the reset lemma and the polymatroid
//! bound.

mod bound;
mod measure;
mod reset;
mod witness;

pub use bound::{
    constraint_measures, log_stats, solve_maxmin_dual, solve_maxmin_with, solve_polymatroid_bound, BoundExpr, BoundValue, LogScale, LogStats, MaxMinSolution,
    PolymatroidBound,
};
pub use measure::{basis_measures, eval_measure, is_polymatroid, Basis, LinExpr, Measure, PolymatroidVector};
pub use reset::{ineq_vars, reset, reset_tracked, ResetOutcome};
pub use witness::{
    common_denominator, count_unconditional, find_witness, integralize, verify_identity, IntegralInequality, Witness, WitnessOutcome, MAX_LP_VARS,
    MAX_MULTIPLICITY,
};
