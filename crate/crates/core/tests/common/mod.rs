//! Random programs shared by the integration tests.

#![allow(dead_code)]

use panda_core::{Atom, ConjunctiveQuery, DegreeConstraint, DisjunctiveRule, Schema, StatisticsProfile, VarSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(n: usize) -> Vec<String> {
    ["x", "y", "z", "w", "u", "v"][..n].iter().map(|s| s.to_string()).collect()
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, size: usize) -> VarSet {
    let mut v = VarSet::EMPTY;
    while v.len() < size {
        v = v.with(rng.gen_range(0..n));
    }
    v
}

/// Distinct atoms of two or three variables covering `0..n`.
pub fn random_body(rng: &mut ChaCha8Rng, n: usize) -> Vec<VarSet> {
    let full = VarSet::full(n);
    let mut atoms: Vec<VarSet> = Vec::new();
    while atoms.iter().fold(VarSet::EMPTY, |a, b| a.union(*b)) != full || atoms.len() < 2 {
        let size = rng.gen_range(2..=3usize.min(n));
        let v = random_set(rng, n, size);
        if !atoms.contains(&v) {
            atoms.push(v);
        }
    }
    atoms
}

pub fn schema(prefix: &str, sets: &[VarSet]) -> Schema {
    Schema::new(sets.iter().enumerate().map(|(i, v)| Atom::over(format!("{prefix}{i}"), *v)).collect()).unwrap()
}

/// Cardinality `2^[2,8)` on every atom and, half the time, one degree
/// constraint between two variables of an atom.
pub fn random_profile(rng: &mut ChaCha8Rng, atoms: &[VarSet]) -> StatisticsProfile {
    let mut cs: Vec<DegreeConstraint> = atoms.iter().enumerate().map(|(i, v)| DegreeConstraint::cardinality(i, *v, 1u32 << rng.gen_range(2..8))).collect();
    if rng.gen_bool(0.5) {
        let i = rng.gen_range(0..atoms.len());
        let vs: Vec<usize> = atoms[i].iter().collect();
        cs.push(DegreeConstraint::degree(i, VarSet::singleton(vs[1]), VarSet::singleton(vs[0]), rng.gen_range(1..4u32)));
    }
    StatisticsProfile::new(cs)
}

/// A rule over 3 to 5 variables with one or two heads.
pub fn random_rule(seed: u64) -> (DisjunctiveRule, StatisticsProfile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=5usize);
    let atoms = random_body(&mut rng, n);
    let mut heads: Vec<VarSet> = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let size = rng.gen_range(2..=n);
        let h = random_set(&mut rng, n, size);
        if !heads.contains(&h) {
            heads.push(h);
        }
    }
    let rule = DisjunctiveRule::new(names(n), schema("R", &atoms), schema("A", &heads)).unwrap();
    let p = random_profile(&mut rng, &atoms);
    (rule, p)
}

/// A query over 3 to 5 variables with a random free set.
pub fn random_cq(seed: u64) -> ConjunctiveQuery {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=5usize);
    let atoms = random_body(&mut rng, n);
    let free = VarSet::from_bits(rng.gen_range(0..=VarSet::full(n).bits()));
    ConjunctiveQuery::new(names(n), Atom::over("Q", free), schema("R", &atoms)).unwrap()
}
