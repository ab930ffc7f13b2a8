//! Degree-aware fractional hypertree width and submodular width.

use super::td::{enumerate_free_connex_tds, prune_dominated, TreeDecomposition};
use crate::entropy::{constraint_measures, log_stats, solve_maxmin_with, Basis, LogStats, MaxMinSolution, Measure};
use crate::error::Result;
use crate::lp::Rational;
use crate::query::{ConjunctiveQuery, StatisticsProfile};
use crate::varset::VarSet;
use std::collections::HashMap;

/// Drops duplicates and supersets: `min_Z h(Z)` only depends on the
/// minimal targets.
pub fn normalize_targets(targets: &[VarSet]) -> Vec<VarSet> {
    let mut out: Vec<VarSet> = targets.iter().copied().filter(|t| !targets.iter().any(|u| u != t && u.is_subset(*t))).collect();
    out.sort();
    out.dedup();
    out
}

/// Max-min LPs over one profile, cached by normalized target set.
pub struct WidthSolver {
    n: usize,
    deltas: Vec<Measure>,
    stats: LogStats,
    basis: Basis,
    cache: HashMap<Vec<VarSet>, MaxMinSolution>,
    pub lp_calls: usize,
}

impl WidthSolver {
    pub fn new(n: usize, profile: &StatisticsProfile, basis: Basis) -> WidthSolver {
        WidthSolver { n, deltas: constraint_measures(profile), stats: log_stats(profile), basis, cache: HashMap::new(), lp_calls: 0 }
    }

    pub fn stats(&self) -> &LogStats {
        &self.stats
    }

    pub fn solution(&mut self, targets: &[VarSet]) -> Result<&MaxMinSolution> {
        let key = normalize_targets(targets);
        if !self.cache.contains_key(&key) {
            self.lp_calls += 1;
            let sol = solve_maxmin_with(self.n, &key, &self.deltas, &self.stats.n, self.basis)?;
            self.cache.insert(key.clone(), sol);
        }
        Ok(&self.cache[&key])
    }

    pub fn opt(&mut self, targets: &[VarSet]) -> Result<Rational> {
        Ok(self.solution(targets)?.opt.clone())
    }
}

/// Decompositions used by the width and answering paths.
pub fn candidate_tds(q: &ConjunctiveQuery) -> Result<Vec<TreeDecomposition>> {
    Ok(prune_dominated(enumerate_free_connex_tds(q)?))
}

#[derive(Clone, Debug)]
pub struct FhtwResult {
    /// In the units of `stats`.
    pub value: Rational,
    pub td: TreeDecomposition,
    pub stats: LogStats,
}

/// `min` over decompositions of `max` over bags of `max h(bag)`.
pub fn compute_fhtw(q: &ConjunctiveQuery, profile: &StatisticsProfile, basis: Basis) -> Result<FhtwResult> {
    let tds = candidate_tds(q)?;
    let mut solver = WidthSolver::new(q.names.len(), profile, basis);
    let mut best: Option<(Rational, usize)> = None;
    for (i, td) in tds.iter().enumerate() {
        let mut worst = None::<Rational>;
        for b in td.maximal_bags() {
            let v = solver.opt(&[b])?;
            if worst.as_ref().is_none_or(|w| v > *w) {
                worst = Some(v);
            }
        }
        let worst = worst.expect("decomposition has a bag");
        if best.as_ref().is_none_or(|b| worst < b.0) {
            best = Some((worst, i));
        }
    }
    let (value, i) = best.expect("at least the trivial decomposition");
    Ok(FhtwResult { value, td: tds[i].clone(), stats: solver.stats().clone() })
}

#[derive(Clone, Debug)]
pub struct SubwResult {
    pub value: Rational,
    /// A bag selection attaining the value.
    pub worst: Vec<VarSet>,
    pub tds: Vec<TreeDecomposition>,
    pub stats: LogStats,
    pub lp_calls: usize,
}

fn next_unhit(tds: &[TreeDecomposition], chosen: &[VarSet]) -> Option<usize> {
    tds.iter().position(|td| !chosen.iter().any(|z| td.covers(*z)))
}

/// Every leaf of the selection search: one maximal bag per decomposition,
/// where a decomposition already containing a chosen bag is skipped.
fn selection_leaves(tds: &[TreeDecomposition]) -> Vec<Vec<VarSet>> {
    fn go(tds: &[TreeDecomposition], maxes: &[Vec<VarSet>], chosen: &mut Vec<VarSet>, out: &mut Vec<Vec<VarSet>>) {
        match next_unhit(tds, chosen) {
            None => {
                let mut c = chosen.clone();
                c.sort();
                c.dedup();
                out.push(c);
            }
            Some(i) => {
                for b in &maxes[i] {
                    chosen.push(*b);
                    go(tds, maxes, chosen, out);
                    chosen.pop();
                }
            }
        }
    }
    let maxes: Vec<Vec<VarSet>> = tds.iter().map(|t| t.maximal_bags()).collect();
    let mut out = Vec::new();
    go(tds, &maxes, &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

/// The bag selections the answering path has to solve: search leaves with
/// their targets normalized, keeping only those minimal under inclusion.
/// Shrinking the target set can only raise the max-min value, and a leaf
/// is covered by any selection it contains, so nothing else is needed.
pub fn bag_selections(tds: &[TreeDecomposition]) -> Vec<Vec<VarSet>> {
    let mut sels: Vec<Vec<VarSet>> = selection_leaves(tds).iter().map(|s| normalize_targets(s)).collect();
    sels.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sels.dedup();
    let mut out: Vec<Vec<VarSet>> = Vec::new();
    for s in sels {
        if !out.iter().any(|m| m.iter().all(|z| s.contains(z))) {
            out.push(s);
        }
    }
    out
}

/// `max` over [`bag_selections`] of the max-min LP.
pub fn compute_subw(q: &ConjunctiveQuery, profile: &StatisticsProfile, basis: Basis) -> Result<SubwResult> {
    let tds = candidate_tds(q)?;
    let mut solver = WidthSolver::new(q.names.len(), profile, basis);
    let mut best: Option<(Rational, Vec<VarSet>)> = None;
    for sel in bag_selections(&tds) {
        let v = solver.opt(&sel)?;
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, sel));
        }
    }
    let (value, worst) = best.expect("at least one selection");
    Ok(SubwResult { value, worst, tds, stats: solver.stats().clone(), lp_calls: solver.lp_calls })
}

/// Maximum over every search leaf, with no minimality filtering.
pub fn subw_exhaustive(q: &ConjunctiveQuery, profile: &StatisticsProfile, basis: Basis) -> Result<Rational> {
    let tds = candidate_tds(q)?;
    let mut solver = WidthSolver::new(q.names.len(), profile, basis);
    let mut best = None::<Rational>;
    for sel in selection_leaves(&tds) {
        let v = solver.opt(&sel)?;
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    Ok(best.expect("at least one selection"))
}
