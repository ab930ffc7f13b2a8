//! Shared inputs for the benchmarks.

use panda_core::oracle::InstanceGenerator;
use panda_core::{Atom, ConjunctiveQuery, DisjunctiveRule, Instance, Schema, StatisticsProfile, VarSet};

fn names(n: usize) -> Vec<String> {
    ["X", "Y", "Z", "W", "U", "V"][..n].iter().map(|s| s.to_string()).collect()
}

fn schema(prefix: &str, sets: &[VarSet]) -> Schema {
    Schema::new(sets.iter().enumerate().map(|(i, v)| Atom::over(format!("{prefix}{i}"), *v)).collect()).unwrap()
}

fn edge(a: usize, b: usize) -> VarSet {
    VarSet::from_vars([a, b])
}

/// `A(XYZ) ∨ B(YZW) :- R(XY), S(YZ), U(ZW)` with `|R| = |S| = |U| ≤ n`.
pub fn two_headed(n: usize, seed: u64) -> (DisjunctiveRule, StatisticsProfile, Instance) {
    let input = schema("R", &[edge(0, 1), edge(1, 2), edge(2, 3)]);
    let output = schema("A", &[VarSet::from_vars([0, 1, 2]), VarSet::from_vars([1, 2, 3])]);
    let rule = DisjunctiveRule::new(names(4), input, output).unwrap();
    let p = StatisticsProfile::uniform_cardinalities(&rule.input, n as u32);
    let inst = InstanceGenerator::new(seed, 2 * n as u32, n, 0.3).generate_within(&rule.input, &p);
    (rule, p, inst)
}

/// Cycle of length `k` with the given free variables.
pub fn cycle(k: usize, free: &[usize]) -> ConjunctiveQuery {
    let body = schema("R", &(0..k).map(|i| edge(i, (i + 1) % k)).collect::<Vec<_>>());
    ConjunctiveQuery::new(names(k), Atom::over("Q", VarSet::from_vars(free.iter().copied())), body).unwrap()
}

/// `q` with a cardinality of `n` per atom and a random instance within it.
pub fn with_data(q: &ConjunctiveQuery, n: usize, seed: u64) -> (StatisticsProfile, Instance) {
    let p = StatisticsProfile::uniform_cardinalities(&q.body, n as u32);
    let inst = InstanceGenerator::new(seed, 2 * n as u32, n, 0.3).generate_within(&q.body, &p);
    (p, inst)
}
