//! Brute-force references for tests: backtracking joins, model coverage,
//! direct LPs over the polymatroid cone, and a seeded instance generator.
//!
//! Nothing here calls into the engine or planner. The relational code used
//! is limited to [`Table`] as a container.

mod generate;
mod shannon;

pub use generate::{InstanceGenerator, Shape, ATTEMPTS_PER_ROW};
pub use shannon::{check_shannon_direct, maxmin_primal, Cone, ORACLE_MAX_VARS};

use crate::error::{Error, Result};
use crate::query::{ConjunctiveQuery, DisjunctiveRule, Instance};
use crate::relation::{Table, Tuple, Value};
use crate::varset::{Var, VarSet};
use std::collections::{BTreeSet, HashMap, HashSet};

/// Cap on the partial assignments alive at any depth of the enumeration.
pub const ORACLE_TUPLE_CAP: usize = 100_000;

struct Step {
    atom: usize,
    /// Variables of the atom bound by earlier atoms, and their column in
    /// the atom's rows.
    bound: Vec<(Var, usize)>,
    fresh: Vec<(Var, usize)>,
    index: HashMap<Vec<Value>, Vec<usize>>,
}

fn plan(instance: &Instance) -> Vec<Step> {
    let atoms = instance.schema.atoms();
    let mut left: Vec<usize> = (0..atoms.len()).collect();
    let mut seen = VarSet::EMPTY;
    let mut steps = Vec::new();
    while !left.is_empty() {
        // most shared variables first, then smaller table, then index
        let k = (0..left.len())
            .min_by_key(|&k| {
                let a = &atoms[left[k]];
                (usize::MAX - a.vars.intersect(seen).len(), instance.tables[left[k]].len(), left[k])
            })
            .unwrap();
        let i = left.remove(k);
        let vars = atoms[i].vars;
        let bound: Vec<(Var, usize)> = vars.iter().enumerate().filter(|(_, v)| seen.contains(*v)).map(|(c, v)| (v, c)).collect();
        let fresh: Vec<(Var, usize)> = vars.iter().enumerate().filter(|(_, v)| !seen.contains(*v)).map(|(c, v)| (v, c)).collect();
        let mut index: HashMap<Vec<Value>, Vec<usize>> = HashMap::new();
        for (r, row) in instance.tables[i].rows().iter().enumerate() {
            index.entry(bound.iter().map(|&(_, c)| row[c]).collect()).or_default().push(r);
        }
        seen = seen.union(vars);
        steps.push(Step { atom: i, bound, fresh, index });
    }
    steps
}

/// Every assignment of `vars(Σ)` satisfying all atoms, by extending partial
/// assignments one atom at a time.
pub fn naive_full_join(instance: &Instance) -> Result<Table> {
    let all = instance.schema.vars();
    let steps = plan(instance);
    let width = all.iter().max().map_or(0, |v| v + 1);
    let mut level: Vec<Vec<Value>> = vec![vec![0; width]];
    for st in &steps {
        let rows = instance.tables[st.atom].rows();
        let mut next = Vec::new();
        for a in &level {
            let key: Vec<Value> = st.bound.iter().map(|&(v, _)| a[v]).collect();
            for &r in st.index.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                let mut b = a.clone();
                for &(v, c) in &st.fresh {
                    b[v] = rows[r][c];
                }
                next.push(b);
                if next.len() > ORACLE_TUPLE_CAP {
                    return Err(Error::OracleCap(format!("more than {ORACLE_TUPLE_CAP} partial assignments")));
                }
            }
        }
        level = next;
    }
    Ok(Table::new(all, level.into_iter().map(|a| all.iter().map(|v| a[v]).collect::<Tuple>())))
}

fn pick(row: &[Value], positions: &[usize]) -> Tuple {
    positions.iter().map(|&p| row[p]).collect()
}

/// `π_F` of the full join, sorted.
pub fn naive_cq(q: &ConjunctiveQuery, instance: &Instance) -> Result<Table> {
    let full = naive_full_join(instance)?;
    let pos = full.vars().positions_of(q.free());
    let rows: BTreeSet<Tuple> = full.rows().iter().map(|r| pick(r, &pos)).collect();
    Ok(Table::new(q.free(), rows))
}

/// Whether every full-join tuple projects into the table of some output
/// atom. `model` is aligned with `rule.output`.
pub fn verify_model(instance: &Instance, rule: &DisjunctiveRule, model: &[Table]) -> Result<bool> {
    Ok(uncovered(instance, rule, model)?.is_none())
}

/// First full-join tuple no output table covers.
pub fn uncovered(instance: &Instance, rule: &DisjunctiveRule, model: &[Table]) -> Result<Option<Tuple>> {
    let outs = rule.output.atoms();
    if model.len() != outs.len() || outs.iter().zip(model).any(|(a, t)| a.vars != t.vars()) {
        return Err(Error::SchemaMismatch("model does not match the output atoms".into()));
    }
    let full = naive_full_join(instance)?;
    let sets: Vec<HashSet<&[Value]>> = model.iter().map(Table::row_set).collect();
    let pos: Vec<Vec<usize>> = outs.iter().map(|a| full.vars().positions_of(a.vars)).collect();
    for row in full.rows() {
        if !pos.iter().zip(&sets).any(|(p, s)| s.contains(&pick(row, p)[..])) {
            return Ok(Some(row.clone()));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{Atom, Schema};

    fn s(v: &[usize]) -> VarSet {
        VarSet::from_vars(v.iter().copied())
    }

    fn t(vars: VarSet, rows: &[&[u32]]) -> Table {
        Table::new(vars, rows.iter().map(|r| r.to_vec().into_boxed_slice()))
    }

    fn inst(atoms: &[(&str, &[usize])], tables: Vec<Table>) -> Instance {
        let schema = Schema::new(atoms.iter().map(|(n, v)| Atom::over(*n, s(v))).collect()).unwrap();
        Instance::new(schema, tables).unwrap()
    }

    fn names(n: usize) -> Vec<String> {
        ["X", "Y", "Z", "W"][..n].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn two_atom_join() {
        let i = inst(&[("R", &[0, 1]), ("S", &[1, 2])], vec![t(s(&[0, 1]), &[&[1, 2]]), t(s(&[1, 2]), &[&[2, 3]])]);
        assert_eq!(naive_full_join(&i).unwrap().sorted_rows(), vec![vec![1u32, 2, 3].into_boxed_slice()]);
        let j = inst(&[("R", &[0, 1]), ("S", &[1, 2])], vec![t(s(&[0, 1]), &[&[1, 2]]), t(s(&[1, 2]), &[&[5, 3]])]);
        assert!(naive_full_join(&j).unwrap().is_empty());
    }

    #[test]
    fn symmetric_triangle_has_six() {
        let e: &[&[u32]] = &[&[1, 2], &[2, 3], &[3, 1], &[2, 1], &[3, 2], &[1, 3]];
        let i = inst(&[("E1", &[0, 1]), ("E2", &[1, 2]), ("E3", &[0, 2])], vec![t(s(&[0, 1]), e), t(s(&[1, 2]), e), t(s(&[0, 2]), e)]);
        // symmetric edge set, so column order of E3 does not matter
        assert_eq!(naive_full_join(&i).unwrap().len(), 6);
    }

    #[test]
    fn cq_projection_and_boolean() {
        let i = inst(&[("R", &[0, 1]), ("S", &[1, 2])], vec![t(s(&[0, 1]), &[&[1, 2], &[1, 3], &[4, 9]]), t(s(&[1, 2]), &[&[2, 7], &[3, 7], &[3, 8]])]);
        let q = ConjunctiveQuery::new(names(3), Atom::over("Q", s(&[0])), i.schema.clone()).unwrap();
        assert_eq!(naive_cq(&q, &i).unwrap().sorted_rows(), vec![vec![1u32].into_boxed_slice()]);
        let b = ConjunctiveQuery::new(names(3), Atom::over("Q", VarSet::EMPTY), i.schema.clone()).unwrap();
        assert_eq!(naive_cq(&b, &i).unwrap().len(), 1);
        let f = ConjunctiveQuery::new(names(3), Atom::over("Q", s(&[0, 1, 2])), i.schema.clone()).unwrap();
        assert!(naive_cq(&f, &i).unwrap().same_rows(&naive_full_join(&i).unwrap()));
    }

    #[test]
    fn four_cycle_by_hand() {
        // R(X,Y) S(Y,Z) U(Z,W) V(X,W) with one closed cycle 1-2-3-4
        let i = inst(
            &[("R", &[0, 1]), ("S", &[1, 2]), ("U", &[2, 3]), ("V", &[0, 3])],
            vec![t(s(&[0, 1]), &[&[1, 2], &[5, 2]]), t(s(&[1, 2]), &[&[2, 3]]), t(s(&[2, 3]), &[&[3, 4]]), t(s(&[0, 3]), &[&[1, 4]])],
        );
        let q = ConjunctiveQuery::new(names(4), Atom::over("Q", s(&[0, 1])), i.schema.clone()).unwrap();
        assert_eq!(naive_cq(&q, &i).unwrap().sorted_rows(), vec![vec![1u32, 2].into_boxed_slice()]);
    }

    #[test]
    fn model_coverage() {
        let i = inst(&[("R", &[0, 1])], vec![t(s(&[0, 1]), &[&[1, 2], &[3, 4]])]);
        let out = Schema::new(vec![Atom::over("A", s(&[0])), Atom::over("B", s(&[1]))]).unwrap();
        let rule = DisjunctiveRule::new(names(2), i.schema.clone(), out).unwrap();
        let a = t(s(&[0]), &[&[1], &[3]]);
        assert!(verify_model(&i, &rule, &[a, Table::empty(s(&[1]))]).unwrap());
        let partial = t(s(&[0]), &[&[1]]);
        assert!(!verify_model(&i, &rule, &[partial.clone(), Table::empty(s(&[1]))]).unwrap());
        assert!(verify_model(&i, &rule, &[partial, t(s(&[1]), &[&[4]])]).unwrap());
        assert!(verify_model(&i, &rule, &[Table::empty(s(&[1]))]).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let rows: Vec<Tuple> = (0..400u32).map(|v| vec![v].into_boxed_slice()).collect();
        let i = inst(&[("R", &[0]), ("S", &[1])], vec![Table::new(s(&[0]), rows.clone()), Table::new(s(&[1]), rows)]);
        assert!(matches!(naive_full_join(&i), Err(Error::OracleCap(_))));
    }
}
