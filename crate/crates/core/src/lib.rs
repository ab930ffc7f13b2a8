//! Evaluation of disjunctive rules and conjunctive queries under degree
//! constraints, with runtime governed by polymatroid bounds.
//!
//! The pipeline: an exact LP yields a bound and a Shannon-inequality witness
//! ([`entropy`]); the engine ([`panda`]) replays the witness as relational
//! operations over [`relation`] tables; the [`planner`] splits a conjunctive
//! query into rules over tree-decomposition bags and finishes with a
//! semijoin-based acyclic evaluation.

pub mod entropy;
pub mod error;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod panda;
pub mod planner;
pub mod query;
pub mod relation;
pub mod varset;

pub use error::{Error, Result};
pub use lp::Rational;
pub use query::{Atom, ConjunctiveQuery, DegreeConstraint, DisjunctiveRule, Instance, Schema, StatisticsProfile};
pub use relation::{Dictionary, Stat, Table, Tuple, Value};
pub use varset::{Var, VarSet};
