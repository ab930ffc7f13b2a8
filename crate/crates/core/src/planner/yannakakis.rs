//! Semijoin passes over a free-connex decomposition, then joins along the
//! free subtree.

use super::td::TreeDecomposition;
use crate::error::{Error, Result};
use crate::relation::{natural_join, project, semijoin, Table};
use crate::varset::VarSet;

/// Output of the acyclic query whose atoms are the bag tables, projected on
/// `free`. `tables` is aligned with `td.bags`.
pub fn yannakakis(tables: &[Table], td: &TreeDecomposition, free: VarSet) -> Result<Table> {
    if tables.len() != td.bags.len() || tables.iter().zip(&td.bags).any(|(t, b)| t.vars() != *b) {
        return Err(Error::SchemaMismatch("bag tables do not match the decomposition".into()));
    }
    let union = td.free_nodes.iter().fold(VarSet::EMPTY, |a, &i| a.union(td.bags[i]));
    if union != free {
        return Err(Error::NotFreeConnex(format!("free nodes cover {:?}, expected {:?}", union, free)));
    }
    let root = td.free_nodes.first().copied().unwrap_or(0);
    let order = td.bfs(root);
    let mut t: Vec<Table> = tables.to_vec();
    for &(n, p) in order.iter().rev() {
        if let Some(p) = p {
            t[p] = semijoin(&t[p], &t[n]);
        }
    }
    if free.is_empty() {
        return Ok(if t[root].is_empty() { Table::empty(VarSet::EMPTY) } else { Table::unit() });
    }
    for &(n, p) in &order {
        if let Some(p) = p {
            t[n] = semijoin(&t[n], &t[p]);
        }
    }
    let mut acc: Option<Table> = None;
    for &(n, _) in &order {
        if td.free_nodes.contains(&n) {
            acc = Some(match acc {
                None => t[n].clone(),
                Some(a) => natural_join(&a, &t[n]),
            });
        }
    }
    let out = project(&acc.expect("free nodes are nonempty"), free)?;
    Ok(Table::new(free, out.sorted_rows()))
}
