//! Atoms, schemas, queries, rules, degree constraints and instances.

use crate::error::{Error, Result};
use crate::relation::{construct, project, Stat, Table};
use crate::varset::{Var, VarSet, MAX_VARS};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    pub vars: VarSet,
    /// Argument order as written; `vars` is the same set.
    pub terms: Vec<Var>,
}

impl Atom {
    pub fn new(name: impl Into<String>, terms: Vec<Var>) -> Result<Atom> {
        let name = name.into();
        let vars = VarSet::from_vars(terms.iter().copied());
        if vars.len() != terms.len() {
            return Err(Error::SchemaMismatch(format!("atom {name} repeats a variable")));
        }
        Ok(Atom { name, vars, terms })
    }

    /// An atom whose arguments follow variable-index order.
    pub fn over(name: impl Into<String>, vars: VarSet) -> Atom {
        Atom { name: name.into(), vars, terms: vars.iter().collect() }
    }

    pub fn render(&self, names: &[String]) -> String {
        let args: Vec<&str> = self.terms.iter().map(|&v| names[v].as_str()).collect();
        format!("{}({})", self.name, args.join(","))
    }
}

/// Ordered atoms with pairwise distinct variable sets.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Schema {
    atoms: Vec<Atom>,
}

impl Schema {
    pub fn new(atoms: Vec<Atom>) -> Result<Schema> {
        for (i, a) in atoms.iter().enumerate() {
            if let Some(b) = atoms[..i].iter().find(|b| b.vars == a.vars) {
                return Err(Error::DuplicateAtomVarSet(b.name.clone(), a.name.clone()));
            }
        }
        Ok(Schema { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn vars(&self) -> VarSet {
        self.atoms.iter().fold(VarSet::EMPTY, |s, a| s.union(a.vars))
    }

    pub fn position_by_vars(&self, vars: VarSet) -> Option<usize> {
        self.atoms.iter().position(|a| a.vars == vars)
    }
}

fn check_universe(names: &[String]) -> Result<()> {
    if names.len() > MAX_VARS {
        return Err(Error::UniverseTooLarge { vars: names.len(), limit: MAX_VARS });
    }
    Ok(())
}

/// `head(F) :- body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjunctiveQuery {
    pub names: Vec<String>,
    pub head: Atom,
    pub body: Schema,
}

impl ConjunctiveQuery {
    pub fn new(names: Vec<String>, head: Atom, body: Schema) -> Result<ConjunctiveQuery> {
        check_universe(&names)?;
        if let Some(v) = head.vars.minus(body.vars()).iter().next() {
            return Err(Error::HeadVarNotInBody(names.get(v).cloned().unwrap_or_else(|| format!("v{v}"))));
        }
        Ok(ConjunctiveQuery { names, head, body })
    }

    pub fn free(&self) -> VarSet {
        self.head.vars
    }

    pub fn vars(&self) -> VarSet {
        self.body.vars()
    }

    pub fn is_full(&self) -> bool {
        self.free() == self.vars()
    }
}

/// `out_1 ∨ … ∨ out_k :- input`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjunctiveRule {
    pub names: Vec<String>,
    pub input: Schema,
    pub output: Schema,
}

impl DisjunctiveRule {
    pub fn new(names: Vec<String>, input: Schema, output: Schema) -> Result<DisjunctiveRule> {
        check_universe(&names)?;
        if output.is_empty() {
            return Err(Error::SchemaMismatch("rule has no output atom".into()));
        }
        let vars = input.vars();
        for a in output.atoms() {
            if let Some(v) = a.vars.minus(vars).iter().next() {
                return Err(Error::HeadVarNotInBody(names.get(v).cloned().unwrap_or_else(|| format!("v{v}"))));
            }
        }
        Ok(DisjunctiveRule { names, input, output })
    }

    pub fn vars(&self) -> VarSet {
        self.input.vars()
    }
}

/// `(Y|X) ≤ bound`, guarded by input atom `guard`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeConstraint {
    pub y: VarSet,
    pub x: VarSet,
    pub bound: Stat,
    pub guard: usize,
}

impl DegreeConstraint {
    pub fn cardinality(atom: usize, vars: VarSet, bound: impl Into<Stat>) -> DegreeConstraint {
        DegreeConstraint { y: vars, x: VarSet::EMPTY, bound: bound.into(), guard: atom }
    }

    pub fn degree(atom: usize, y: VarSet, x: VarSet, bound: impl Into<Stat>) -> DegreeConstraint {
        DegreeConstraint { y, x, bound: bound.into(), guard: atom }
    }

    pub fn is_cardinality(&self) -> bool {
        self.x.is_empty()
    }

    /// Human-readable name such as `R(XY|∅)` or `S(Z|Y)`.
    pub fn label(&self, schema: &Schema, names: &[String]) -> String {
        let g = schema.atoms().get(self.guard).map_or("?", |a| a.name.as_str());
        if self.x.is_empty() && schema.atoms().get(self.guard).is_some_and(|a| a.vars == self.y) {
            format!("|{g}|")
        } else {
            let x = if self.x.is_empty() { "∅".to_string() } else { self.x.display(names).to_string() };
            format!("{g}({}|{x})", self.y.display(names))
        }
    }
}

/// Degree constraints over one input schema.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StatisticsProfile {
    pub constraints: Vec<DegreeConstraint>,
}

impl StatisticsProfile {
    pub fn new(constraints: Vec<DegreeConstraint>) -> StatisticsProfile {
        StatisticsProfile { constraints }
    }

    /// A cardinality bound `n` on every atom.
    pub fn uniform_cardinalities(schema: &Schema, n: impl Into<Stat>) -> StatisticsProfile {
        let n: Stat = n.into();
        StatisticsProfile { constraints: schema.atoms().iter().enumerate().map(|(i, a)| DegreeConstraint::cardinality(i, a.vars, n.clone())).collect() }
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        for c in &self.constraints {
            let Some(g) = schema.atoms().get(c.guard) else {
                return Err(Error::UnknownRelation(format!("#{}", c.guard)));
            };
            if c.y.is_empty() || !c.x.is_disjoint(c.y) {
                return Err(Error::NonGuardedConstraint(g.name.clone(), "Y must be nonempty and disjoint from X".into()));
            }
            if !c.y.is_subset(g.vars) {
                return Err(Error::NonGuardedConstraint(g.name.clone(), "Y is not contained in the relation".into()));
            }
        }
        Ok(())
    }

    /// The common bound when every constraint has the same one.
    pub fn common_bound(&self) -> Option<&Stat> {
        let first = &self.constraints.first()?.bound;
        self.constraints.iter().all(|c| &c.bound == first).then_some(first)
    }
}

/// Tables aligned with the atoms of a schema.
#[derive(Clone, Debug)]
pub struct Instance {
    pub schema: Schema,
    pub tables: Vec<Table>,
}

impl Instance {
    pub fn new(schema: Schema, tables: Vec<Table>) -> Result<Instance> {
        if schema.len() != tables.len() {
            return Err(Error::SchemaMismatch(format!("{} atoms but {} tables", schema.len(), tables.len())));
        }
        for (a, t) in schema.atoms().iter().zip(&tables) {
            if a.vars != t.vars() {
                return Err(Error::SchemaMismatch(format!("table for {} has the wrong variables", a.name)));
            }
        }
        Ok(Instance { schema, tables })
    }

    pub fn total_size(&self) -> usize {
        self.tables.iter().map(Table::len).sum()
    }
}

/// `deg_rel(Y|X)`: the largest number of distinct `Y`-bindings sharing one
/// `X`-binding. Variables of `X` outside the relation are unconstrained.
pub fn degree_of(rel: &Table, y: VarSet, x: VarSet) -> Result<u64> {
    if rel.is_empty() {
        return Ok(0);
    }
    if !y.is_subset(rel.vars()) {
        return Err(Error::UnguardedDegree { what: format!("({:?}|{:?}) over {:?}", y, x, rel.vars()) });
    }
    let keys = x.intersect(rel.vars());
    let r = project(rel, keys.union(y.minus(keys)))?;
    Ok(construct(&r, keys)?.max_degree() as u64)
}

/// Checks every constraint against its guarding table. Reports the first
/// violated constraint.
pub fn check_profile(instance: &Instance, profile: &StatisticsProfile, names: &[String]) -> Result<()> {
    profile.validate(&instance.schema)?;
    for c in &profile.constraints {
        let d = degree_of(&instance.tables[c.guard], c.y, c.x)?;
        if Stat::from(d) > c.bound {
            return Err(Error::ConstraintViolated(format!("{} <= {} but the data has degree {d}", c.label(&instance.schema, names), c.bound)));
        }
    }
    Ok(())
}

pub fn satisfies(instance: &Instance, profile: &StatisticsProfile) -> bool {
    check_profile(instance, profile, &[]).is_ok()
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.body.atoms().iter().map(|a| a.render(&self.names)).collect();
        write!(f, "{} :- {}.", self.head.render(&self.names), body.join(", "))
    }
}

impl fmt::Display for DisjunctiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = self.output.atoms().iter().map(|a| a.render(&self.names)).collect();
        let body: Vec<String> = self.input.atoms().iter().map(|a| a.render(&self.names)).collect();
        write!(f, "{} :- {}.", head.join(" | "), body.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::Value;

    fn vs(v: &[usize]) -> VarSet {
        VarSet::from_vars(v.iter().copied())
    }

    fn table(vars: &[usize], rows: &[&[Value]]) -> Table {
        Table::new(vs(vars), rows.iter().map(|r| r.to_vec().into_boxed_slice()))
    }

    fn names(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn degree_examples() {
        // vars X=0, Y=1
        let r = table(&[0, 1], &[&[1, 1], &[1, 2]]);
        assert_eq!(degree_of(&r, vs(&[1]), vs(&[0])).unwrap(), 2);
        assert_eq!(degree_of(&Table::empty(vs(&[0, 1])), vs(&[1]), vs(&[0])).unwrap(), 0);
        let one = table(&[0, 1], &[&[1, 1]]);
        assert_eq!(degree_of(&one, vs(&[0, 1]), VarSet::EMPTY).unwrap(), 1);
        assert!(matches!(degree_of(&r, vs(&[2]), VarSet::EMPTY), Err(Error::UnguardedDegree { .. })));
        // X outside the relation is ignored
        assert_eq!(degree_of(&r, vs(&[1]), vs(&[0, 5])).unwrap(), 2);
        // Y ∪ X smaller than the relation: restriction first
        let r3 = table(&[0, 1, 2], &[&[1, 1, 1], &[1, 1, 2], &[1, 2, 1]]);
        assert_eq!(degree_of(&r3, vs(&[1]), vs(&[0])).unwrap(), 2);
    }

    #[test]
    fn satisfies_examples() {
        let schema = Schema::new(vec![Atom::over("R", vs(&[0, 1]))]).unwrap();
        let r3 = table(&[0, 1], &[&[1, 1], &[1, 2], &[2, 2]]);
        let inst = Instance::new(schema.clone(), vec![r3]).unwrap();
        assert!(satisfies(&inst, &StatisticsProfile::uniform_cardinalities(&schema, 4u32)));
        let r5 = table(&[0, 1], &[&[1, 1], &[1, 2], &[2, 2], &[3, 3], &[4, 4]]);
        let inst5 = Instance::new(schema.clone(), vec![r5]).unwrap();
        assert!(!satisfies(&inst5, &StatisticsProfile::uniform_cardinalities(&schema, 4u32)));
        let fd = StatisticsProfile::new(vec![DegreeConstraint::degree(0, vs(&[1]), vs(&[0]), 1u32)]);
        assert!(!satisfies(&inst, &fd));
        let err = check_profile(&inst, &fd, &names(&["X", "Y"])).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolated(ref s) if s.contains("R(Y|X)")));
    }

    #[test]
    fn schema_rules() {
        let a = Atom::over("R", vs(&[0, 1]));
        let b = Atom::new("S", vec![1, 0]).unwrap();
        assert!(matches!(Schema::new(vec![a.clone(), b]), Err(Error::DuplicateAtomVarSet(_, _))));
        assert!(Atom::new("T", vec![0, 0]).is_err());
        let body = Schema::new(vec![a]).unwrap();
        let head = Atom::over("Q", vs(&[2]));
        assert!(matches!(ConjunctiveQuery::new(names(&["x", "y", "z"]), head, body.clone()), Err(Error::HeadVarNotInBody(v)) if v == "z"));
        assert!(DisjunctiveRule::new(names(&["x", "y"]), body, Schema::default()).is_err());
    }

    #[test]
    fn profile_validation() {
        let schema = Schema::new(vec![Atom::over("R", vs(&[0, 1]))]).unwrap();
        let bad = StatisticsProfile::new(vec![DegreeConstraint::degree(0, vs(&[2]), vs(&[1]), 5u32)]);
        assert!(matches!(bad.validate(&schema), Err(Error::NonGuardedConstraint(_, _))));
        let good = StatisticsProfile::new(vec![DegreeConstraint::degree(0, vs(&[0]), vs(&[1]), 1u32)]);
        assert!(good.validate(&schema).is_ok());
    }

    #[test]
    fn raising_bounds_is_monotone() {
        let schema = Schema::new(vec![Atom::over("R", vs(&[0, 1]))]).unwrap();
        let r = table(&[0, 1], &[&[1, 1], &[1, 2], &[2, 2]]);
        let inst = Instance::new(schema, vec![r]).unwrap();
        for n in 0u32..6 {
            let p = StatisticsProfile::new(vec![DegreeConstraint::degree(0, vs(&[1]), vs(&[0]), n)]);
            let q = StatisticsProfile::new(vec![DegreeConstraint::degree(0, vs(&[1]), vs(&[0]), n + 1)]);
            assert!(!satisfies(&inst, &p) || satisfies(&inst, &q));
        }
    }
}
