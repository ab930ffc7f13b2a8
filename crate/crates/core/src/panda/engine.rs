//! The sub-problem tree: root construction, preprocessing, the three cases,
//! and gathering the model from terminal leaves.

use super::node::{check_invariants, Budget, Guard, Node};
use crate::entropy::{constraint_measures, integralize, reset_tracked, solve_polymatroid_bound, verify_identity, Basis, IntegralInequality, Measure};
use crate::error::{Error, Result};
use crate::query::{DisjunctiveRule, Instance, StatisticsProfile};
use crate::relation::{construct, extend, join_counted, partition, project, Stat, Table, Tuple};
use crate::varset::VarSet;
use num_traits::One;
use rayon::prelude::*;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PandaOptions {
    /// Expand sibling sub-problems on the rayon pool.
    pub parallel: bool,
    /// Record one [`TraceLine`] per node.
    pub trace: bool,
    /// Run [`check_invariants`] on every node.
    pub check_invariants: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTaken {
    Terminal,
    Join,
    Reset,
    Project,
    Partition,
}

impl fmt::Display for CaseTaken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseTaken::Terminal => "terminal",
            CaseTaken::Join => "join",
            CaseTaken::Reset => "reset",
            CaseTaken::Project => "project",
            CaseTaken::Partition => "partition",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct TraceLine {
    /// Child indices from the root.
    pub path: Vec<usize>,
    pub case: CaseTaken,
    pub delta: Option<Measure>,
    pub z: usize,
    pub d: usize,
    pub m: usize,
    pub s: usize,
    pub scanned: usize,
    pub emitted: usize,
    pub children: usize,
}

impl TraceLine {
    pub fn render(&self, names: &[String]) -> String {
        let path = if self.path.is_empty() { "root".to_string() } else { self.path.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(".") };
        let delta = self.delta.map_or("-".to_string(), |d| d.display(names).to_string());
        format!(
            "node={path} depth={} case={} delta={delta} |Z|={} |D|={} |M|={} |S|={} scanned={} emitted={} children={}",
            self.path.len(),
            self.case,
            self.z,
            self.d,
            self.m,
            self.s,
            self.scanned,
            self.emitted,
            self.children
        )
    }
}

#[derive(Clone, Debug)]
pub struct PandaReport {
    pub ineq: IntegralInequality,
    pub budget: Budget,
    pub root_potential: usize,
    pub preprocess_resets: usize,
    pub nodes: usize,
    pub leaves: usize,
    pub max_depth: usize,
    /// Largest per-node count of tuples read from guards.
    pub max_scanned: usize,
    /// Largest per-node count of tuples materialized.
    pub max_emitted: usize,
    /// Tuples read while building the root guards.
    pub input_touches: usize,
    /// Sum of scanned and emitted tuples over all nodes.
    pub tree_touches: usize,
    pub trace: Vec<TraceLine>,
}

/// Output tables aligned with the rule's output atoms.
#[derive(Clone, Debug)]
pub struct Model {
    pub tables: Vec<Table>,
}

impl Model {
    pub fn empty(rule: &DisjunctiveRule) -> Model {
        Model { tables: rule.output.atoms().iter().map(|a| Table::empty(a.vars)).collect() }
    }

    pub fn total_size(&self) -> usize {
        self.tables.iter().map(Table::len).sum()
    }
}

/// Result of one call to [`step`].
#[derive(Clone, Debug)]
pub struct Step {
    pub case: CaseTaken,
    pub delta: Measure,
    pub children: Vec<Node>,
    pub scanned: usize,
    pub emitted: usize,
}

fn smallest_index<T: Ord + Copy>(items: &[T], pred: impl Fn(&T) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, it) in items.iter().enumerate() {
        if pred(it) && best.is_none_or(|b| *it < items[b]) {
            best = Some(i);
        }
    }
    best
}

/// Guard for `(y|x)` read from one input table.
fn input_guard(table: &Table, y: VarSet, x: VarSet, bound: &Stat) -> Result<Guard> {
    if x.is_empty() {
        return Ok(Guard::Table(Arc::new(project(table, y)?.with_stat(bound.clone()))));
    }
    let keys = x.intersect(table.vars());
    let base = project(table, keys.union(y))?;
    let mut d = construct(&base, keys)?.with_stat(bound.clone());
    if keys != x {
        d = extend(&d, x.minus(keys))?;
    }
    Ok(Guard::Dict(d))
}

/// Builds the root node: each statistics term is guarded by the profile
/// constraint with the same measure and the smallest bound.
pub fn root_node(rule: &DisjunctiveRule, instance: &Instance, profile: &StatisticsProfile, ineq: &IntegralInequality) -> Result<(Node, Budget)> {
    if !verify_identity(ineq) {
        return Err(Error::InvalidWitness("identity does not hold".into()));
    }
    if ineq.z.is_empty() {
        return Err(Error::EmptyOutputSet);
    }
    if let Some(z) = ineq.z.iter().find(|z| rule.output.position_by_vars(**z).is_none()) {
        return Err(Error::InvalidWitness(format!("output term {} is not an output atom", z.display(&rule.names))));
    }
    if instance.tables.len() != rule.input.len() {
        return Err(Error::SchemaMismatch("instance does not match the input schema".into()));
    }
    let measures = constraint_measures(profile);
    let mut cache: HashMap<usize, Guard> = HashMap::new();
    let mut guards = Vec::with_capacity(ineq.d.len());
    let mut product = Stat::one();
    for d in &ineq.d {
        let pick = measures
            .iter()
            .enumerate()
            .filter(|(_, m)| *m == d)
            .min_by(|a, b| profile.constraints[a.0].bound.cmp(&profile.constraints[b.0].bound).then(a.0.cmp(&b.0)))
            .map(|p| p.0);
        let Some(ci) = pick else {
            return Err(Error::UnguardedConstraint(d.display(&rule.names).to_string()));
        };
        let c = &profile.constraints[ci];
        let g = match cache.get(&ci) {
            Some(g) => g.clone(),
            None => {
                let g = input_guard(&instance.tables[c.guard], c.y, c.x, &c.bound)?;
                if !g.satisfies_stat() {
                    return Err(Error::ConstraintViolated(format!("{} exceeds {}", c.label(&rule.input, &rule.names), c.bound)));
                }
                cache.insert(ci, g.clone());
                g
            }
        };
        product *= &c.bound;
        guards.push(g);
    }
    let budget = Budget::new(ineq.z.len(), product);
    Ok((Node { ineq: ineq.clone(), guards, depth: 0 }, budget))
}

fn reset_node(node: &Node, drop: usize) -> Result<Node> {
    let out = reset_tracked(&node.ineq, drop)?;
    if out.ineq.z.is_empty() {
        return Err(Error::EmptyOutputSet);
    }
    let guards = out.kept.iter().map(|&i| node.guards[i].clone()).collect();
    Ok(Node { ineq: out.ineq, guards, depth: node.depth })
}

/// Drops unconditional terms whose statistic exceeds the budget.
/// Returns the node and the number of resets applied.
pub fn preprocess(root: Node, budget: &Budget) -> Result<(Node, usize)> {
    let mut node = root;
    let mut resets = 0;
    loop {
        let over =
            node.ineq.d.iter().enumerate().filter(|(i, d)| d.is_unconditional() && !budget.admits(node.stat(*i))).min_by_key(|(i, d)| (**d, *i)).map(|p| p.0);
        let Some(i) = over else { break };
        node = reset_node(&node, i)?;
        resets += 1;
    }
    Ok((node, resets))
}

fn without(v: &[Measure], idx: &[usize]) -> Vec<Measure> {
    v.iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|p| *p.1).collect()
}

fn guards_without(v: &[Guard], idx: &[usize]) -> Vec<Guard> {
    v.iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|p| p.1.clone()).collect()
}

fn table_guard(node: &Node, i: usize) -> Result<&Arc<Table>> {
    node.guards[i].table().ok_or_else(|| Error::InvariantViolated(format!("unconditional term {i} is guarded by a dictionary")))
}

/// Applies one case of the tree-growing loop to a non-terminal node.
pub fn step(node: &Node, budget: &Budget) -> Result<Step> {
    let q = &node.ineq;
    let describe = || format!("{:?}", q);
    let mut pick: Option<(Measure, usize)> = None;
    for (i, d) in q.d.iter().enumerate() {
        if d.is_unconditional() && pick.is_none_or(|p| (*d, i) < p) {
            pick = Some((*d, i));
        }
    }
    let Some((delta, di)) = pick else {
        return Err(Error::NoApplicableCase(describe()));
    };
    let w = delta.vars();
    let child = |ineq: IntegralInequality, guards: Vec<Guard>| Node { ineq, guards, depth: node.depth + 1 };

    // Case 1: a statistics term (Y|W)
    if let Some(j) = smallest_index(&q.d, |t| matches!(t, Measure::Mon { x, .. } if *x == w)) {
        let Measure::Mon { y, .. } = q.d[j] else { unreachable!() };
        let n = node.stat(di) * node.stat(j);
        let mut d = without(&q.d, &[di, j]);
        let mut guards = guards_without(&node.guards, &[di, j]);
        d.push(Measure::card(w.union(y)));
        if budget.admits(&n) {
            let t = table_guard(node, di)?;
            let dict = node.guards[j].dict().ok_or_else(|| Error::InvariantViolated(format!("conditional term {j} is guarded by a table")))?;
            let (joined, probes) = join_counted(t, dict)?;
            let emitted = joined.len();
            guards.push(Guard::Table(Arc::new(joined)));
            let ineq = IntegralInequality::new(q.z.clone(), d, q.m.clone(), q.s.clone());
            return Ok(Step { case: CaseTaken::Join, delta, children: vec![child(ineq, guards)], scanned: probes, emitted });
        }
        // the placeholder guard is dropped by the reset below
        guards.push(node.guards[di].clone());
        let bar = Node { ineq: IntegralInequality::new(q.z.clone(), d, q.m.clone(), q.s.clone()), guards, depth: node.depth };
        let last = bar.ineq.d.len() - 1;
        let mut out = reset_node(&bar, last)?;
        out.depth = node.depth + 1;
        return Ok(Step { case: CaseTaken::Reset, delta, children: vec![out], scanned: 0, emitted: 0 });
    }

    // Case 2: a monotonicity term (Y|X) with XY = W
    if let Some(k) = smallest_index(&q.m, |t| t.vars() == w) {
        let x = q.m[k].x();
        let t = table_guard(node, di)?;
        let mut m = q.m.clone();
        m.remove(k);
        let mut d = without(&q.d, &[di]);
        let mut guards = guards_without(&node.guards, &[di]);
        let mut emitted = 0;
        if !x.is_empty() {
            let p = project(t, x)?;
            emitted = p.len();
            d.push(Measure::card(x));
            guards.push(Guard::Table(Arc::new(p)));
        }
        let ineq = IntegralInequality::new(q.z.clone(), d, m, q.s.clone());
        return Ok(Step { case: CaseTaken::Project, delta, children: vec![child(ineq, guards)], scanned: t.len(), emitted });
    }

    // Case 3: a submodularity term (Y;Z|X) with XY = W
    let hit = |t: &Measure| matches!(t, Measure::Sub { y, z, x } if x.union(*y) == w || x.union(*z) == w);
    if let Some(k) = smallest_index(&q.s, hit) {
        let Measure::Sub { y: sy, z: sz, x } = q.s[k] else { unreachable!() };
        let (y, z) = if x.union(sy) == w { (sy, sz) } else { (sz, sy) };
        let t = table_guard(node, di)?;
        let mut s = q.s.clone();
        s.remove(k);
        let base_d = without(&q.d, &[di]);
        let base_g = guards_without(&node.guards, &[di]);
        let parts = if t.is_empty() { Vec::new() } else { partition(t, x)? };
        let mut children = Vec::with_capacity(parts.len());
        let mut emitted = 0;
        for part in parts {
            emitted += part.len();
            let mut d = base_d.clone();
            let mut guards = base_g.clone();
            if !x.is_empty() {
                let px = project(&part, x)?;
                let n = Stat::from(px.len());
                d.push(Measure::card(x));
                guards.push(Guard::Table(Arc::new(px.with_stat(n))));
            }
            let dict = construct(&part, x)?;
            let dict = if z.is_empty() { dict } else { extend(&dict, z)? };
            d.push(Measure::mon(y, x.union(z)));
            guards.push(Guard::Dict(dict));
            children.push(child(IntegralInequality::new(q.z.clone(), d, q.m.clone(), s.clone()), guards));
        }
        return Ok(Step { case: CaseTaken::Partition, delta, children, scanned: t.len(), emitted });
    }
    Err(Error::NoApplicableCase(describe()))
}

/// Unions the guard of each leaf's smallest qualifying `(Z|∅)` into `Q(Z)`.
pub fn gather(leaves: &[Node], rule: &DisjunctiveRule) -> Result<Model> {
    let mut acc: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new(); rule.output.len()];
    for leaf in leaves {
        let i = leaf.terminal_index().ok_or(Error::NonTerminalLeaf)?;
        let zv = leaf.ineq.d[i].vars();
        let pos = rule.output.position_by_vars(zv).ok_or_else(|| Error::InvalidWitness("terminal term is not an output atom".into()))?;
        let t = table_guard(leaf, i)?;
        acc[pos].extend(t.rows().iter().cloned());
    }
    let tables = rule.output.atoms().iter().zip(acc).map(|(a, rows)| Table::new(a.vars, rows)).collect();
    Ok(Model { tables })
}

#[derive(Default)]
struct Subtree {
    leaves: Vec<Node>,
    trace: Vec<TraceLine>,
    nodes: usize,
    max_depth: usize,
    max_scanned: usize,
    max_emitted: usize,
    touches: usize,
}

impl Subtree {
    fn absorb(&mut self, o: Subtree) {
        self.leaves.extend(o.leaves);
        self.trace.extend(o.trace);
        self.nodes += o.nodes;
        self.max_depth = self.max_depth.max(o.max_depth);
        self.max_scanned = self.max_scanned.max(o.max_scanned);
        self.max_emitted = self.max_emitted.max(o.max_emitted);
        self.touches += o.touches;
    }
}

fn line(node: &Node, path: &[usize], case: CaseTaken, delta: Option<Measure>, scanned: usize, emitted: usize, children: usize) -> TraceLine {
    let q = &node.ineq;
    TraceLine { path: path.to_vec(), case, delta, z: q.z.len(), d: q.d.len(), m: q.m.len(), s: q.s.len(), scanned, emitted, children }
}

fn expand(node: Node, budget: &Budget, opts: &PandaOptions, path: Vec<usize>) -> Result<Subtree> {
    if opts.check_invariants {
        let r = check_invariants(&node, budget);
        if let Some((inv, msg)) = r.violations.first() {
            return Err(Error::InvariantViolated(format!("{inv} at node {path:?}: {msg}")));
        }
    }
    let mut out = Subtree { nodes: 1, max_depth: node.depth, ..Subtree::default() };
    if node.is_terminal() {
        if opts.trace {
            out.trace.push(line(&node, &path, CaseTaken::Terminal, None, 0, 0, 0));
        }
        out.leaves.push(node);
        return Ok(out);
    }
    let st = step(&node, budget)?;
    if !budget.admits_count(st.scanned) || !budget.admits_count(st.emitted) {
        return Err(Error::InvariantViolated(format!("node {path:?} touched {} / {} tuples, above the budget {budget}", st.scanned, st.emitted)));
    }
    out.max_scanned = st.scanned;
    out.max_emitted = st.emitted;
    out.touches = st.scanned + st.emitted;
    // a sub-problem with an empty guard has an empty join
    let children: Vec<Node> = st.children.into_iter().filter(|c| c.guards.iter().all(|g| !g.is_empty())).collect();
    if opts.trace {
        out.trace.push(line(&node, &path, st.case, Some(st.delta), st.scanned, st.emitted, children.len()));
    }
    let sub = |(i, c): (usize, Node)| {
        let mut p = path.clone();
        p.push(i);
        expand(c, budget, opts, p)
    };
    let results: Vec<Result<Subtree>> = if opts.parallel && children.len() > 1 {
        children.into_par_iter().enumerate().map(sub).collect()
    } else {
        children.into_iter().enumerate().map(sub).collect()
    };
    for r in results {
        out.absorb(r?);
    }
    Ok(out)
}

/// Evaluates `rule` on `instance` by replaying `ineq`, returning a model in
/// which every tuple of the full input join has a projection onto some
/// output atom.
pub fn run_panda(
    rule: &DisjunctiveRule,
    instance: &Instance,
    profile: &StatisticsProfile,
    ineq: &IntegralInequality,
    opts: &PandaOptions,
) -> Result<(Model, PandaReport)> {
    let (root, budget) = root_node(rule, instance, profile, ineq)?;
    let mut report = PandaReport {
        ineq: ineq.clone(),
        root_potential: ineq.potential(),
        budget: budget.clone(),
        preprocess_resets: 0,
        nodes: 0,
        leaves: 0,
        max_depth: 0,
        max_scanned: 0,
        max_emitted: 0,
        input_touches: instance.total_size(),
        tree_touches: 0,
        trace: Vec::new(),
    };
    if instance.tables.iter().any(Table::is_empty) || root.guards.iter().any(Guard::is_empty) {
        return Ok((Model::empty(rule), report));
    }
    let (root, resets) = preprocess(root, &budget)?;
    report.preprocess_resets = resets;
    let tree = expand(root, &budget, opts, Vec::new())?;
    let model = gather(&tree.leaves, rule)?;
    report.nodes = tree.nodes;
    report.leaves = tree.leaves.len();
    report.max_depth = tree.max_depth;
    report.max_scanned = tree.max_scanned;
    report.max_emitted = tree.max_emitted;
    report.tree_touches = tree.touches;
    report.trace = tree.trace;
    Ok((model, report))
}

/// Solves the bound LP, clears denominators and runs the engine.
pub fn evaluate_rule(
    rule: &DisjunctiveRule,
    instance: &Instance,
    profile: &StatisticsProfile,
    basis: Basis,
    opts: &PandaOptions,
) -> Result<(Model, PandaReport)> {
    let ineq = rule_inequality(rule, profile, basis)?;
    run_panda(rule, instance, profile, &ineq, opts)
}

/// Integral witness of the polymatroid bound of `rule`.
pub fn rule_inequality(rule: &DisjunctiveRule, profile: &StatisticsProfile, basis: Basis) -> Result<IntegralInequality> {
    let bound = solve_polymatroid_bound(rule, profile, basis)?;
    let w: Vec<(Measure, crate::lp::Rational)> = constraint_measures(profile).into_iter().zip(bound.expr.w).collect();
    integralize(&bound.lambda, &w, &bound.witness)
}
