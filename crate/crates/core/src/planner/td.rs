//! Free-connex tree decompositions from elimination orders.

use crate::entropy::MAX_LP_VARS;
use crate::error::{Error, Result};
use crate::query::ConjunctiveQuery;
use crate::varset::{Var, VarSet};
use std::collections::{HashSet, VecDeque};

/// A tree over distinct bags plus the connected set of nodes whose bags
/// union to the free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<VarSet>,
    pub edges: Vec<(usize, usize)>,
    /// Empty exactly when the free set is empty.
    pub free_nodes: Vec<usize>,
}

impl TreeDecomposition {
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Bags not strictly contained in another bag.
    pub fn maximal_bags(&self) -> Vec<VarSet> {
        let mut out: Vec<VarSet> = self.bags.iter().copied().filter(|b| !self.bags.iter().any(|c| b != c && b.is_subset(*c))).collect();
        out.sort();
        out
    }

    /// Bag set in canonical order.
    pub fn bag_key(&self) -> Vec<VarSet> {
        let mut k = self.bags.clone();
        k.sort();
        k
    }

    /// Some bag of `self` contains `z`.
    pub fn covers(&self, z: VarSet) -> bool {
        self.bags.iter().any(|b| z.is_subset(*b))
    }

    /// Nodes in breadth-first order from `root`, with parents.
    pub fn bfs(&self, root: usize) -> Vec<(usize, Option<usize>)> {
        let mut seen = vec![false; self.bags.len()];
        let mut out = Vec::with_capacity(self.bags.len());
        let mut queue = VecDeque::from([(root, None)]);
        seen[root] = true;
        while let Some((n, p)) = queue.pop_front() {
            out.push((n, p));
            for c in self.neighbors(n) {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back((c, Some(n)));
                }
            }
        }
        out
    }

    /// Checks coverage, running intersection, distinct bags, tree shape and
    /// the free-connex property against `q`.
    pub fn validate(&self, q: &ConjunctiveQuery) -> Result<()> {
        let n = self.bags.len();
        let bad = |m: String| Err(Error::PreconditionViolated(m));
        if n == 0 {
            return bad("decomposition has no bags".into());
        }
        if self.edges.len() != n - 1 || self.bfs(0).len() != n {
            return bad("bags do not form a tree".into());
        }
        if self.bag_key().windows(2).any(|w| w[0] == w[1]) {
            return bad("bags are not distinct".into());
        }
        for a in q.body.atoms() {
            if !self.covers(a.vars) {
                return bad(format!("atom {} is not covered by a bag", a.name));
            }
        }
        for v in q.vars().iter() {
            let holders: Vec<usize> = (0..n).filter(|&i| self.bags[i].contains(v)).collect();
            if !connected(self, &holders) {
                return bad(format!("bags holding variable {v} are not connected"));
            }
        }
        let f = q.free();
        let union = self.free_nodes.iter().fold(VarSet::EMPTY, |a, &i| a.union(self.bags[i]));
        if union != f || !connected(self, &self.free_nodes) || (f.is_empty() != self.free_nodes.is_empty()) {
            return Err(Error::NotFreeConnex(format!("free nodes {:?} do not form a connected subtree covering exactly the free variables", self.free_nodes)));
        }
        Ok(())
    }
}

fn connected(td: &TreeDecomposition, nodes: &[usize]) -> bool {
    let Some(&start) = nodes.first() else { return true };
    let set: HashSet<usize> = nodes.iter().copied().collect();
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        for c in td.neighbors(n) {
            if set.contains(&c) && seen.insert(c) {
                stack.push(c);
            }
        }
    }
    seen.len() == set.len()
}

fn primal_graph(q: &ConjunctiveQuery, n: usize) -> Vec<VarSet> {
    let mut adj = vec![VarSet::EMPTY; n];
    for a in q.body.atoms() {
        for v in a.vars.iter() {
            adj[v] = adj[v].union(a.vars.minus(VarSet::singleton(v)));
        }
    }
    adj
}

/// Variables outside `gone` reachable from `v` through paths whose inner
/// vertices are all in `gone`.
fn reach(adj: &[VarSet], gone: VarSet, v: Var) -> VarSet {
    let mut out = VarSet::EMPTY;
    let mut seen = VarSet::singleton(v);
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for w in adj[u].minus(seen).iter() {
            seen = seen.with(w);
            if gone.contains(w) {
                stack.push(w);
            } else {
                out = out.with(w);
            }
        }
    }
    out
}

/// Elimination tree of `order`, chained across components with the free
/// roots first, then with contained bags absorbed.
fn from_order(adj: &[VarSet], order: &[Var], free: VarSet) -> TreeDecomposition {
    let pos = |v: Var| order.iter().position(|&u| u == v).expect("variable in order");
    let mut bags = Vec::with_capacity(order.len());
    let mut parent: Vec<Option<usize>> = Vec::with_capacity(order.len());
    let mut gone = VarSet::EMPTY;
    for &v in order {
        let nb = reach(adj, gone, v);
        bags.push(nb.with(v));
        parent.push(nb.iter().map(pos).min());
        gone = gone.with(v);
    }
    let mut roots: Vec<usize> = (0..order.len()).filter(|&i| parent[i].is_none()).collect();
    roots.sort_by_key(|&i| (!bags[i].is_subset(free) || free.is_empty(), i));
    let mut edges: Vec<(usize, usize)> = (0..order.len()).filter_map(|i| parent[i].map(|p| (i, p))).collect();
    edges.extend(roots.windows(2).map(|w| (w[1], w[0])));
    absorb(bags, edges, free)
}

fn absorb(mut bags: Vec<VarSet>, mut edges: Vec<(usize, usize)>, free: VarSet) -> TreeDecomposition {
    let in_free = |b: VarSet| !free.is_empty() && b.is_subset(free);
    let mut alive = vec![true; bags.len()];
    loop {
        // merge `a` into a neighbor `b ⊇ a`, never a free bag into a non-free one
        let hit = edges.iter().enumerate().find_map(|(k, &(x, y))| {
            [(x, y), (y, x)].into_iter().find(|&(a, b)| bags[a].is_subset(bags[b]) && !(in_free(bags[a]) && !in_free(bags[b]))).map(|p| (k, p))
        });
        let Some((k, (a, b))) = hit else { break };
        edges.swap_remove(k);
        for e in edges.iter_mut() {
            if e.0 == a {
                e.0 = b;
            }
            if e.1 == a {
                e.1 = b;
            }
        }
        alive[a] = false;
    }
    let mut remap = vec![usize::MAX; bags.len()];
    let mut kept = Vec::new();
    for (i, b) in bags.drain(..).enumerate() {
        if alive[i] {
            remap[i] = kept.len();
            kept.push(b);
        }
    }
    let mut edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (remap[a].min(remap[b]), remap[a].max(remap[b]))).collect();
    edges.sort_unstable();
    let free_nodes = (0..kept.len()).filter(|&i| in_free(kept[i])).collect();
    TreeDecomposition { bags: kept, edges, free_nodes }
}

/// Single bag `V`, with a child bag `F` when `F` is neither empty nor `V`.
pub fn trivial_td(q: &ConjunctiveQuery) -> TreeDecomposition {
    let v = q.vars();
    let f = q.free();
    if f.is_empty() {
        TreeDecomposition { bags: vec![v], edges: vec![], free_nodes: vec![] }
    } else if f == v {
        TreeDecomposition { bags: vec![v], edges: vec![], free_nodes: vec![0] }
    } else {
        TreeDecomposition { bags: vec![v, f], edges: vec![(0, 1)], free_nodes: vec![1] }
    }
}

fn check_size(q: &ConjunctiveQuery) -> Result<usize> {
    let n = q.names.len();
    if n > MAX_LP_VARS {
        return Err(Error::UniverseTooLarge { vars: n, limit: MAX_LP_VARS });
    }
    Ok(n)
}

/// All decompositions produced by elimination orders that remove every
/// bound variable before any free one, deduplicated by bag set, followed by
/// the trivial decomposition.
pub fn enumerate_free_connex_tds(q: &ConjunctiveQuery) -> Result<Vec<TreeDecomposition>> {
    let n = check_size(q)?;
    let adj = primal_graph(q, n);
    let vars = q.vars();
    let free = q.free();
    let mut out: Vec<TreeDecomposition> = Vec::new();
    let mut keys: HashSet<Vec<VarSet>> = HashSet::new();
    let mut visited: HashSet<(VarSet, Vec<VarSet>)> = HashSet::new();
    let mut order = Vec::with_capacity(vars.len());
    let mut bags = Vec::with_capacity(vars.len());
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        adj: &[VarSet],
        vars: VarSet,
        free: VarSet,
        gone: VarSet,
        order: &mut Vec<Var>,
        bags: &mut Vec<VarSet>,
        visited: &mut HashSet<(VarSet, Vec<VarSet>)>,
        emit: &mut dyn FnMut(&[Var]),
    ) {
        let rest = vars.minus(gone);
        if rest.is_empty() {
            emit(order);
            return;
        }
        let mut key = bags.clone();
        key.sort();
        if !visited.insert((gone, key)) {
            return;
        }
        let bound = rest.minus(free);
        let cands = if bound.is_empty() { rest } else { bound };
        for v in cands.iter() {
            order.push(v);
            bags.push(reach(adj, gone, v).with(v));
            dfs(adj, vars, free, gone.with(v), order, bags, visited, emit);
            order.pop();
            bags.pop();
        }
    }
    let mut emit = |ord: &[Var]| {
        let td = from_order(&adj, ord, free);
        if keys.insert(td.bag_key()) {
            out.push(td);
        }
    };
    dfs(&adj, vars, free, VarSet::EMPTY, &mut order, &mut bags, &mut visited, &mut emit);
    let t = trivial_td(q);
    if keys.insert(t.bag_key()) {
        out.push(t);
    }
    Ok(out)
}

/// `a` is at least as good as `b` for every polymatroid: each maximal bag
/// of `a` sits inside some bag of `b`.
pub fn dominates(a: &TreeDecomposition, b: &TreeDecomposition) -> bool {
    a.maximal_bags().iter().all(|z| b.covers(*z))
}

/// Drops decompositions dominated by another one; among mutually
/// dominating ones the earliest survives.
pub fn prune_dominated(tds: Vec<TreeDecomposition>) -> Vec<TreeDecomposition> {
    let mut kept: Vec<TreeDecomposition> = Vec::new();
    for td in tds {
        if kept.iter().any(|k| dominates(k, &td)) {
            continue;
        }
        kept.retain(|k| !dominates(&td, k));
        kept.push(td);
    }
    kept
}
