//! Sub-problem nodes, guards, the budget and the invariant checks.

use crate::entropy::{verify_identity, IntegralInequality, Measure};
use crate::relation::{Dictionary, Stat, Table};
use crate::varset::VarSet;
use num_traits::One;
use std::fmt;
use std::sync::Arc;

/// Data guarding one statistics term: a table for `(Y|∅)`, a dictionary
/// for `(Y|X)` with `X` nonempty.
#[derive(Clone, Debug)]
pub enum Guard {
    Table(Arc<Table>),
    Dict(Dictionary),
}

impl Guard {
    pub fn stat(&self) -> &Stat {
        match self {
            Guard::Table(t) => t.stat(),
            Guard::Dict(d) => d.stat(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Guard::Table(t) => t.is_empty(),
            Guard::Dict(d) => d.is_empty(),
        }
    }

    pub fn satisfies_stat(&self) -> bool {
        match self {
            Guard::Table(t) => t.satisfies_stat(),
            Guard::Dict(d) => d.satisfies_stat(),
        }
    }

    /// Whether this guard has the shape `m` requires.
    pub fn fits(&self, m: &Measure) -> bool {
        let Measure::Mon { y, x } = *m else { return false };
        match self {
            Guard::Table(t) => x.is_empty() && t.vars() == y,
            Guard::Dict(d) => d.value_vars() == y && d.effective_keys() == x,
        }
    }

    pub fn table(&self) -> Option<&Arc<Table>> {
        match self {
            Guard::Table(t) => Some(t),
            Guard::Dict(_) => None,
        }
    }

    pub fn dict(&self) -> Option<&Dictionary> {
        match self {
            Guard::Dict(d) => Some(d),
            Guard::Table(_) => None,
        }
    }

    /// Number of stored tuples.
    pub fn size(&self) -> usize {
        match self {
            Guard::Table(t) => t.len(),
            Guard::Dict(d) => d.num_entries(),
        }
    }
}

/// `B = product^{1/Z0}`, compared in integer form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub z0: usize,
    pub product: Stat,
}

impl Budget {
    pub fn new(z0: usize, product: Stat) -> Budget {
        assert!(z0 > 0);
        Budget { z0, product }
    }

    /// `n ≤ B`.
    pub fn admits(&self, n: &Stat) -> bool {
        pow(n, self.z0) <= self.product
    }

    pub fn admits_count(&self, n: usize) -> bool {
        self.admits(&Stat::from(n))
    }

    /// `⌊B⌋`.
    pub fn floor(&self) -> Stat {
        self.product.nth_root(self.z0 as u32)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.z0 == 1 {
            write!(f, "{}", self.product)
        } else {
            write!(f, "{}^(1/{})", self.product, self.z0)
        }
    }
}

pub(crate) fn pow(n: &Stat, e: usize) -> Stat {
    n.pow(e as u32)
}

/// One sub-problem: the inequality plus one guard per statistics term.
#[derive(Clone, Debug)]
pub struct Node {
    pub ineq: IntegralInequality,
    /// Aligned with `ineq.d`.
    pub guards: Vec<Guard>,
    pub depth: usize,
}

impl Node {
    pub fn stat(&self, i: usize) -> &Stat {
        self.guards[i].stat()
    }

    /// Some `(Z|∅)` in `𝒟` with `Z ∈ 𝒵`.
    pub fn is_terminal(&self) -> bool {
        self.terminal_index().is_some()
    }

    /// Index of the qualifying `(Z|∅)` with the smallest `Z`.
    pub fn terminal_index(&self) -> Option<usize> {
        let mut best: Option<(VarSet, usize)> = None;
        for (i, d) in self.ineq.d.iter().enumerate() {
            if let Measure::Mon { y, x } = d {
                if x.is_empty() && self.ineq.z.contains(y) && best.is_none_or(|b| (*y, i) < b) {
                    best = Some((*y, i));
                }
            }
        }
        best.map(|b| b.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    Shannon,
    NonEmptyOutput,
    SmallTables,
    GuardedStatistics,
    UpperBound,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::Shannon => "shannon-identity",
            Invariant::NonEmptyOutput => "non-empty-output",
            Invariant::SmallTables => "small-tables",
            Invariant::GuardedStatistics => "guarded-statistics",
            Invariant::UpperBound => "upper-bound",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub violations: Vec<(Invariant, String)>,
}

impl InvariantReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, inv: Invariant) -> bool {
        self.violations.iter().any(|v| v.0 == inv)
    }
}

/// Checks every per-node invariant. Lossless join is a property of the
/// whole leaf set and is checked against the oracle instead.
pub fn check_invariants(node: &Node, budget: &Budget) -> InvariantReport {
    let mut r = InvariantReport::default();
    let q = &node.ineq;
    if !verify_identity(q) {
        r.violations.push((Invariant::Shannon, "identity residual is nonzero".into()));
    }
    if q.z.is_empty() {
        r.violations.push((Invariant::NonEmptyOutput, "no output terms left".into()));
    }
    if node.guards.len() != q.d.len() {
        r.violations.push((Invariant::GuardedStatistics, format!("{} guards for {} terms", node.guards.len(), q.d.len())));
        return r;
    }
    for (i, (d, g)) in q.d.iter().zip(&node.guards).enumerate() {
        if d.is_unconditional() && !budget.admits(g.stat()) {
            r.violations.push((Invariant::SmallTables, format!("term {i} has statistic {} above the budget", g.stat())));
        }
        if !g.fits(d) {
            r.violations.push((Invariant::GuardedStatistics, format!("term {i} has a guard of the wrong shape")));
        } else if !g.satisfies_stat() {
            r.violations.push((Invariant::GuardedStatistics, format!("term {i} exceeds its statistic {}", g.stat())));
        }
    }
    // (Π N)^{Z0} ≤ product^{|𝒵|}
    let prod = node.guards.iter().fold(Stat::one(), |a, g| a * g.stat());
    if !q.z.is_empty() && pow(&prod, budget.z0) > pow(&budget.product, q.z.len()) {
        r.violations.push((Invariant::UpperBound, format!("statistics product {prod} exceeds the budget for {} outputs", q.z.len())));
    }
    r
}
