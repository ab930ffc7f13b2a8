use super::table::{Stat, Tuple, Value};
use crate::varset::VarSet;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Index from `X`-bindings to sets of `Y`-tuples. Lookups ignore the phantom
/// key variables added by extension.
#[derive(Clone)]
pub struct Dictionary {
    key_vars: VarSet,
    value_vars: VarSet,
    phantom: VarSet,
    index: Arc<HashMap<Tuple, Vec<Tuple>>>,
    stat: Stat,
}

static EMPTY: [Tuple; 0] = [];

impl Dictionary {
    pub(crate) fn from_index(key_vars: VarSet, value_vars: VarSet, index: HashMap<Tuple, Vec<Tuple>>, stat: Stat) -> Dictionary {
        debug_assert!(key_vars.is_disjoint(value_vars));
        Dictionary { key_vars, value_vars, phantom: VarSet::EMPTY, index: Arc::new(index), stat }
    }

    pub(crate) fn with_phantom(&self, extra: VarSet) -> Dictionary {
        Dictionary {
            key_vars: self.key_vars,
            value_vars: self.value_vars,
            phantom: self.phantom.union(extra),
            index: Arc::clone(&self.index),
            stat: self.stat.clone(),
        }
    }

    pub fn with_stat(mut self, stat: Stat) -> Dictionary {
        self.stat = stat;
        self
    }

    pub fn key_vars(&self) -> VarSet {
        self.key_vars
    }

    pub fn value_vars(&self) -> VarSet {
        self.value_vars
    }

    pub fn phantom_keys(&self) -> VarSet {
        self.phantom
    }

    /// Key variables including phantoms: the `X` of `(Y|X)`.
    pub fn effective_keys(&self) -> VarSet {
        self.key_vars.union(self.phantom)
    }

    pub fn stat(&self) -> &Stat {
        &self.stat
    }

    /// `Y`-tuples stored under the `X`-binding `key` (laid out over
    /// `key_vars`); unmapped keys give the empty slice.
    pub fn lookup(&self, key: &[Value]) -> &[Tuple] {
        self.index.get(key).map_or(&EMPTY[..], |v| &v[..])
    }

    pub fn num_keys(&self) -> usize {
        self.index.len()
    }

    pub fn num_entries(&self) -> usize {
        self.index.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Largest value set actually stored.
    pub fn max_degree(&self) -> usize {
        self.index.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Tuple, &Vec<Tuple>)> {
        self.index.iter()
    }

    /// True when both dictionaries share the same underlying index.
    pub fn shares_index_with(&self, other: &Dictionary) -> bool {
        Arc::ptr_eq(&self.index, &other.index)
    }

    pub fn satisfies_stat(&self) -> bool {
        Stat::from(self.max_degree()) <= self.stat
    }
}

impl fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dictionary({:?}|{:?}+{:?})[stat={}, keys={}]", self.value_vars, self.key_vars, self.phantom, self.stat, self.index.len())
    }
}
