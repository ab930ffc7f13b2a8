//! Answering a conjunctive query: one disjunctive rule per bag selection,
//! bag tables gathered from the models, then Yannakakis per decomposition.

use super::td::{trivial_td, TreeDecomposition};
use super::width::{bag_selections, candidate_tds, normalize_targets, WidthSolver};
use super::yannakakis::yannakakis;
use crate::entropy::{constraint_measures, integralize, Basis, IntegralInequality, LogStats, Measure};
use crate::error::Result;
use crate::lp::Rational;
use crate::panda::{run_panda, PandaOptions};
use crate::query::{check_profile, Atom, ConjunctiveQuery, DisjunctiveRule, Instance, Schema, StatisticsProfile};
use crate::relation::{project, semijoin, Table, Tuple};
use crate::varset::VarSet;
use std::collections::{BTreeSet, HashMap};

/// Name of the fresh atom for bag `bag` of decomposition `i`.
pub fn bag_atom_name(i: usize, bag: VarSet, names: &[String]) -> String {
    format!("A{}_{}", i + 1, bag.display(names))
}

/// Every decomposition's bags as fresh atoms, plus one rule per element of
/// the product of the decompositions' maximal bags.
#[derive(Clone, Debug)]
pub struct PlanBundle {
    pub tds: Vec<TreeDecomposition>,
    pub bag_atoms: Vec<Vec<Atom>>,
    pub ddrs: Vec<DisjunctiveRule>,
}

pub fn build_bag_ddrs(q: &ConjunctiveQuery, tds: &[TreeDecomposition]) -> Result<PlanBundle> {
    let bag_atoms = tds.iter().enumerate().map(|(i, td)| td.bags.iter().map(|b| Atom::over(bag_atom_name(i, *b, &q.names), *b)).collect()).collect();
    let maxes: Vec<Vec<VarSet>> = tds.iter().map(|t| t.maximal_bags()).collect();
    let mut ddrs = Vec::new();
    let mut idx = vec![0usize; tds.len()];
    if maxes.iter().all(|m| !m.is_empty()) && !tds.is_empty() {
        loop {
            let mut heads: Vec<Atom> = Vec::new();
            for (i, &j) in idx.iter().enumerate() {
                let z = maxes[i][j];
                if !heads.iter().any(|a| a.vars == z) {
                    heads.push(Atom::over(format!("B{}_{}", i + 1, z.display(&q.names)), z));
                }
            }
            ddrs.push(DisjunctiveRule::new(q.names.clone(), q.body.clone(), Schema::new(heads)?)?);
            // odometer over the product
            let mut k = tds.len();
            loop {
                if k == 0 {
                    return Ok(PlanBundle { tds: tds.to_vec(), bag_atoms, ddrs });
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < maxes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    Ok(PlanBundle { tds: tds.to_vec(), bag_atoms, ddrs })
}

/// Data-independent part of one rule: its heads, LP optimum and integral
/// witness.
#[derive(Clone, Debug)]
pub struct SelectionPlan {
    pub heads: Vec<VarSet>,
    pub rule: DisjunctiveRule,
    pub opt: Rational,
    pub lambda: Vec<Rational>,
    pub w: Vec<Rational>,
    pub ineq: IntegralInequality,
}

#[derive(Clone, Debug)]
pub struct CqPlan {
    pub query: ConjunctiveQuery,
    pub profile: StatisticsProfile,
    pub tds: Vec<TreeDecomposition>,
    pub selections: Vec<SelectionPlan>,
    pub stats: LogStats,
}

#[derive(Clone, Debug, Default)]
pub struct CqReport {
    pub rules_run: usize,
    pub engine_nodes: usize,
    pub engine_touches: usize,
    /// Rows per bag, aligned with the plan's decompositions.
    pub bag_rows: Vec<Vec<usize>>,
    /// Output rows contributed by each decomposition.
    pub td_rows: Vec<usize>,
}

impl CqPlan {
    /// Decompositions, bag selections and one cached witness per selection.
    /// Full queries use the single bag `V`.
    pub fn build(q: &ConjunctiveQuery, profile: &StatisticsProfile, basis: Basis) -> Result<CqPlan> {
        profile.validate(&q.body)?;
        let (tds, sels) = if q.is_full() {
            (vec![trivial_td(q)], vec![vec![q.vars()]])
        } else {
            let tds = candidate_tds(q)?;
            let sels = bag_selections(&tds);
            (tds, sels)
        };
        let mut solver = WidthSolver::new(q.names.len(), profile, basis);
        let measures = constraint_measures(profile);
        let mut selections = Vec::with_capacity(sels.len());
        for sel in sels {
            let heads = normalize_targets(&sel);
            let sol = solver.solution(&heads)?.clone();
            let atoms = heads.iter().map(|h| Atom::over(format!("B_{}", h.display(&q.names)), *h)).collect();
            let rule = DisjunctiveRule::new(q.names.clone(), q.body.clone(), Schema::new(atoms)?)?;
            let lambda: Vec<(VarSet, Rational)> = heads.iter().copied().zip(sol.lambda.iter().cloned()).collect();
            let w: Vec<(Measure, Rational)> = measures.iter().copied().zip(sol.w.iter().cloned()).collect();
            let ineq = integralize(&lambda, &w, &sol.witness)?;
            selections.push(SelectionPlan { heads, rule, opt: sol.opt, lambda: sol.lambda, w: sol.w, ineq });
        }
        Ok(CqPlan { query: q.clone(), profile: profile.clone(), tds, selections, stats: solver.stats().clone() })
    }

    /// Largest LP optimum over the selections; at most the submodular width.
    pub fn max_opt(&self) -> Rational {
        self.selections.iter().map(|s| s.opt.clone()).max().unwrap_or_else(Rational::zero)
    }

    pub fn execute(&self, instance: &Instance, opts: &PandaOptions) -> Result<(Table, CqReport)> {
        let q = &self.query;
        check_profile(instance, &self.profile, &q.names)?;
        let free = q.free();
        let mut report = CqReport::default();
        if instance.tables.iter().any(Table::is_empty) {
            return Ok((Table::empty(free), report));
        }
        let mut acc: HashMap<VarSet, BTreeSet<Tuple>> = HashMap::new();
        for sel in &self.selections {
            let (model, r) = run_panda(&sel.rule, instance, &self.profile, &sel.ineq, opts)?;
            report.rules_run += 1;
            report.engine_nodes += r.nodes;
            report.engine_touches += r.tree_touches;
            for (h, t) in sel.heads.iter().zip(&model.tables) {
                acc.entry(*h).or_default().extend(t.rows().iter().cloned());
            }
        }
        let filter = |bag: VarSet, t: Table| instance.tables.iter().filter(|r| r.vars().is_subset(bag)).fold(t, |a, r| semijoin(&a, r));
        let mut out: BTreeSet<Tuple> = BTreeSet::new();
        for td in &self.tds {
            let maxes = td.maximal_bags();
            let mut full: HashMap<VarSet, Table> = HashMap::new();
            for m in &maxes {
                let rows = acc.get(m).cloned().unwrap_or_default();
                full.insert(*m, filter(*m, Table::new(*m, rows)));
            }
            let mut tables = Vec::with_capacity(td.bags.len());
            for b in &td.bags {
                let t = match full.get(b) {
                    Some(t) => t.clone(),
                    None => {
                        let m = maxes.iter().find(|m| b.is_subset(**m)).expect("every bag sits in a maximal bag");
                        filter(*b, project(&full[m], *b)?)
                    }
                };
                tables.push(t);
            }
            report.bag_rows.push(tables.iter().map(Table::len).collect());
            let res = yannakakis(&tables, td, free)?;
            report.td_rows.push(res.len());
            out.extend(res.rows().iter().cloned());
        }
        Ok((Table::new(free, out), report))
    }
}

/// `π_F` of the body join, exactly.
pub fn answer_cq(q: &ConjunctiveQuery, instance: &Instance, profile: &StatisticsProfile) -> Result<Table> {
    Ok(CqPlan::build(q, profile, Basis::Elemental)?.execute(instance, &PandaOptions::default())?.0)
}
