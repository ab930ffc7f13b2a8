//! Relational operations with statistic propagation.

use super::dictionary::Dictionary;
use super::table::{pick, Stat, Table, Tuple, Value};
use crate::error::{Error, Result};
use crate::varset::VarSet;
use std::collections::{HashMap, HashSet};

/// For each variable of `out`, where to read it: `(false, i)` is column `i`
/// of the left tuple and `(true, i)` column `i` of the right tuple.
fn merge_plan(out: VarSet, left: VarSet, right: VarSet) -> Vec<(bool, usize)> {
    out.iter()
        .map(|v| match left.position(v) {
            Some(p) => (false, p),
            None => (true, right.position(v).expect("variable in neither side")),
        })
        .collect()
}

fn merge(plan: &[(bool, usize)], l: &[Value], r: &[Value]) -> Tuple {
    plan.iter().map(|&(side, p)| if side { r[p] } else { l[p] }).collect()
}

/// `t ⋈ d`: extends each row of `t` by the value tuples stored under its key.
pub fn join(t: &Table, d: &Dictionary) -> Result<Table> {
    let (out, _) = join_counted(t, d)?;
    Ok(out)
}

/// As [`join`], also returning the number of probes made (one per row of `t`).
pub fn join_counted(t: &Table, d: &Dictionary) -> Result<(Table, usize)> {
    if !d.effective_keys().is_subset(t.vars()) {
        return Err(Error::SchemaMismatch(format!("dictionary keys {:?} not contained in table vars {:?}", d.effective_keys(), t.vars())));
    }
    if !d.value_vars().is_disjoint(t.vars()) {
        return Err(Error::SchemaMismatch(format!("dictionary values {:?} overlap table vars {:?}", d.value_vars(), t.vars())));
    }
    let out_vars = t.vars().union(d.value_vars());
    let key_pos = t.vars().positions_of(d.key_vars());
    let plan = merge_plan(out_vars, t.vars(), d.value_vars());
    let mut rows = Vec::new();
    for row in t.rows() {
        let key = pick(row, &key_pos);
        for y in d.lookup(&key) {
            rows.push(merge(&plan, row, y));
        }
    }
    // distinct rows of t with disjoint extensions give distinct outputs
    let stat = t.stat() * d.stat();
    Ok((Table::from_distinct(out_vars, rows, stat), t.len()))
}

/// `π_onto(t)`; the statistic is inherited unchanged.
pub fn project(t: &Table, onto: VarSet) -> Result<Table> {
    if !onto.is_subset(t.vars()) {
        return Err(Error::SchemaMismatch(format!("projection onto {:?} outside {:?}", onto, t.vars())));
    }
    if onto == t.vars() {
        return Ok(t.clone());
    }
    let pos = t.vars().positions_of(onto);
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for row in t.rows() {
        let p = pick(row, &pos);
        if seen.insert(p.clone()) {
            rows.push(p);
        }
    }
    Ok(Table::from_distinct(onto, rows, t.stat().clone()))
}

/// Adds phantom key variables `extra` to `d` without touching its index.
pub fn extend(d: &Dictionary, extra: VarSet) -> Result<Dictionary> {
    if !extra.is_disjoint(d.key_vars().union(d.value_vars())) {
        return Err(Error::SchemaMismatch(format!("extension {:?} overlaps dictionary variables", extra)));
    }
    Ok(d.with_phantom(extra))
}

/// Indexes `t` by its `keys` columns; values are the remaining columns. The
/// statistic is the realized degree.
pub fn construct(t: &Table, keys: VarSet) -> Result<Dictionary> {
    if !keys.is_subset(t.vars()) {
        return Err(Error::SchemaMismatch(format!("keys {:?} outside table vars {:?}", keys, t.vars())));
    }
    let values = t.vars().minus(keys);
    let kpos = t.vars().positions_of(keys);
    let vpos = t.vars().positions_of(values);
    let mut index: HashMap<Tuple, Vec<Tuple>> = HashMap::new();
    for row in t.rows() {
        index.entry(pick(row, &kpos)).or_default().push(pick(row, &vpos));
    }
    let deg = index.values().map(Vec::len).max().unwrap_or(0);
    Ok(Dictionary::from_index(keys, values, index, Stat::from(deg)))
}

/// `⌊log₂ d⌋` for `d ≥ 1`.
pub fn log2_floor(d: usize) -> u32 {
    debug_assert!(d > 0);
    usize::BITS - 1 - d.leading_zeros()
}

/// `⌈log₂ n⌉` for `n ≥ 1`.
pub fn log2_ceil(n: usize) -> u32 {
    debug_assert!(n > 0);
    if n <= 1 {
        0
    } else {
        log2_floor(n - 1) + 1
    }
}

/// Splits `t` into degree-uniform parts on the `keys` columns.
///
/// Keys are bucketed by `⌊log₂ deg(x)⌋`; each bucket is then cut in two by the
/// sorted order of its keys. Every part `P` satisfies
/// `|π_keys(P)| · deg_P(rest | keys) ≤ |t|`. Parts inherit `t`'s statistic.
pub fn partition(t: &Table, keys: VarSet) -> Result<Vec<Table>> {
    if !keys.is_subset(t.vars()) {
        return Err(Error::SchemaMismatch(format!("keys {:?} outside table vars {:?}", keys, t.vars())));
    }
    if t.is_empty() {
        return Err(Error::EmptyInput);
    }
    let kpos = t.vars().positions_of(keys);
    let mut groups: HashMap<Tuple, Vec<usize>> = HashMap::new();
    for (i, row) in t.rows().iter().enumerate() {
        groups.entry(pick(row, &kpos)).or_default().push(i);
    }
    let mut buckets: Vec<Vec<(Tuple, Vec<usize>)>> = Vec::new();
    for (k, idx) in groups {
        let b = log2_floor(idx.len()) as usize;
        if buckets.len() <= b {
            buckets.resize_with(b + 1, Vec::new);
        }
        buckets[b].push((k, idx));
    }
    let mut parts = Vec::new();
    for mut bucket in buckets.into_iter().filter(|b| !b.is_empty()) {
        bucket.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let first = bucket.len().div_ceil(2);
        let (lo, hi) = bucket.split_at(first);
        for half in [lo, hi] {
            if half.is_empty() {
                continue;
            }
            let rows: Vec<Tuple> = half.iter().flat_map(|(_, idx)| idx.iter().map(|&i| t.rows()[i].clone())).collect();
            parts.push(Table::from_distinct(t.vars(), rows, t.stat().clone()));
        }
    }
    Ok(parts)
}

/// Rows of `t` that agree with some row of `filter` on the shared variables.
pub fn semijoin(t: &Table, filter: &Table) -> Table {
    let shared = t.vars().intersect(filter.vars());
    if shared.is_empty() {
        return if filter.is_empty() { Table::empty(t.vars()).with_stat(t.stat().clone()) } else { t.clone() };
    }
    let fpos = filter.vars().positions_of(shared);
    let keys: HashSet<Tuple> = filter.rows().iter().map(|r| pick(r, &fpos)).collect();
    let tpos = t.vars().positions_of(shared);
    let rows = t.rows().iter().filter(|r| keys.contains(&pick(r, &tpos))).cloned().collect();
    Table::from_distinct(t.vars(), rows, t.stat().clone())
}

/// Set union; statistics add.
pub fn union(a: &Table, b: &Table) -> Result<Table> {
    if a.vars() != b.vars() {
        return Err(Error::SchemaMismatch(format!("union of {:?} and {:?}", a.vars(), b.vars())));
    }
    let mut seen: HashSet<&[Value]> = a.rows().iter().map(|r| &r[..]).collect();
    let mut rows = a.rows().to_vec();
    for r in b.rows() {
        if seen.insert(&r[..]) {
            rows.push(r.clone());
        }
    }
    Ok(Table::from_distinct(a.vars(), rows, a.stat() + b.stat()))
}

/// Natural join of two tables by hashing `b` on the shared variables.
pub fn natural_join(a: &Table, b: &Table) -> Table {
    let shared = a.vars().intersect(b.vars());
    let d = construct(b, shared).expect("shared variables lie in b");
    join(a, &d).expect("dictionary keys lie in a").with_stat(a.stat() * b.stat())
}
