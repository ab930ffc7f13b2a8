//! The tree-growing evaluator for disjunctive rules: every step mirrors one
//! rewrite of the integral Shannon identity with a join, a projection or a
//! degree-uniform partition.

mod engine;
mod node;

pub use engine::{
    evaluate_rule, gather, preprocess, root_node, rule_inequality, run_panda, step, CaseTaken, Model, PandaOptions, PandaReport, Step, TraceLine,
};
pub use node::{check_invariants, Budget, Guard, Invariant, InvariantReport, Node};
