use crate::varset::{Var, VarSet};
use num_bigint::BigUint;
use std::collections::HashSet;
use std::fmt;

/// Interned domain constant.
pub type Value = u32;

/// Exact integer statistic attached to tables and dictionaries.
pub type Stat = BigUint;

/// Values laid out in increasing variable-index order of the owning set.
pub type Tuple = Box<[Value]>;

/// A duplicate-free relation over `vars` with a declared statistic.
#[derive(Clone)]
pub struct Table {
    vars: VarSet,
    rows: Vec<Tuple>,
    stat: Stat,
}

impl Table {
    /// Builds a table, dropping duplicate rows (first occurrence wins). The
    /// statistic defaults to the number of distinct rows.
    pub fn new<I>(vars: VarSet, rows: I) -> Table
    where
        I: IntoIterator,
        I::Item: Into<Tuple>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in rows {
            let r: Tuple = r.into();
            assert_eq!(r.len(), vars.len(), "tuple arity does not match its variable set");
            if seen.insert(r.clone()) {
                out.push(r);
            }
        }
        let stat = Stat::from(out.len());
        Table { vars, rows: out, stat }
    }

    /// Builds a table from rows already known to be distinct.
    pub(crate) fn from_distinct(vars: VarSet, rows: Vec<Tuple>, stat: Stat) -> Table {
        debug_assert!(rows.iter().all(|r| r.len() == vars.len()));
        Table { vars, rows, stat }
    }

    pub fn empty(vars: VarSet) -> Table {
        Table { vars, rows: Vec::new(), stat: Stat::from(0u32) }
    }

    /// The nullary table holding the single empty tuple.
    pub fn unit() -> Table {
        Table { vars: VarSet::EMPTY, rows: vec![Box::new([])], stat: Stat::from(1u32) }
    }

    pub fn with_stat(mut self, stat: Stat) -> Table {
        self.stat = stat;
        self
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn rows(&self) -> &[Tuple] {
        &self.rows
    }

    pub fn stat(&self) -> &Stat {
        &self.stat
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when the row count respects the statistic.
    pub fn satisfies_stat(&self) -> bool {
        Stat::from(self.rows.len()) <= self.stat
    }

    /// Value of variable `v` in `row`.
    pub fn value(&self, row: &[Value], v: Var) -> Value {
        row[self.vars.position(v).expect("variable not in table")]
    }

    pub fn sorted_rows(&self) -> Vec<Tuple> {
        let mut r = self.rows.clone();
        r.sort_unstable();
        r
    }

    pub fn row_set(&self) -> HashSet<&[Value]> {
        self.rows.iter().map(|r| &r[..]).collect()
    }

    /// Set equality of rows over the same variables, ignoring statistics.
    pub fn same_rows(&self, other: &Table) -> bool {
        self.vars == other.vars && self.len() == other.len() && {
            let mine = self.row_set();
            other.rows.iter().all(|r| mine.contains(&r[..]))
        }
    }
}

impl fmt::Debug for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Table{:?}[stat={}] {:?}", self.vars, self.stat, self.sorted_rows())
    }
}

/// Projects `row` (over `from`) onto the columns at `positions`.
pub(crate) fn pick(row: &[Value], positions: &[usize]) -> Tuple {
    positions.iter().map(|&p| row[p]).collect()
}
