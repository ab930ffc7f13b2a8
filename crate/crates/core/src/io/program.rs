use super::lex::{parse_error, Cursor, Spanned, Tok};
use crate::error::{Error, Result};
use crate::query::{Atom, ConjunctiveQuery, DegreeConstraint, DisjunctiveRule, Schema, StatisticsProfile};
use crate::relation::Stat;
use crate::varset::{Var, VarSet};
use std::fmt;

/// A parsed query file: one head atom is a conjunctive query, two or more
/// `|`-separated heads are a disjunctive rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Program {
    Query(ConjunctiveQuery),
    Rule(DisjunctiveRule),
}

impl Program {
    pub fn names(&self) -> &[String] {
        match self {
            Program::Query(q) => &q.names,
            Program::Rule(r) => &r.names,
        }
    }

    pub fn body(&self) -> &Schema {
        match self {
            Program::Query(q) => &q.body,
            Program::Rule(r) => &r.input,
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Query(q) => q.fmt(f),
            Program::Rule(r) => r.fmt(f),
        }
    }
}

struct RawAtom {
    name: String,
    terms: Vec<(String, Spanned)>,
    at: Spanned,
}

fn raw_atom(c: &mut Cursor) -> Result<RawAtom> {
    let (name, at) = c.ident()?;
    c.expect(&Tok::LParen)?;
    let mut terms = Vec::new();
    if !c.eat(&Tok::RParen) {
        loop {
            terms.push(c.ident()?);
            if c.eat(&Tok::RParen) {
                break;
            }
            c.expect(&Tok::Comma)?;
        }
    }
    Ok(RawAtom { name, terms, at })
}

fn resolve(a: &RawAtom, names: &mut Vec<String>) -> Result<Atom> {
    let mut terms: Vec<Var> = Vec::new();
    for (t, sp) in &a.terms {
        let v = match names.iter().position(|n| n == t) {
            Some(v) => v,
            None => {
                names.push(t.clone());
                names.len() - 1
            }
        };
        if terms.contains(&v) {
            return Err(parse_error(sp.line, sp.col, format!("variable `{t}` repeats in atom {}", a.name)));
        }
        terms.push(v);
    }
    Atom::new(a.name.clone(), terms)
}

/// Parses `H(..) :- B1(..), .., Bm(..).` or `H1(..) | H2(..) | .. :- ..`.
/// Variables are numbered by first occurrence.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut c = Cursor::new(text)?;
    let mut heads = vec![raw_atom(&mut c)?];
    while c.eat(&Tok::Pipe) {
        heads.push(raw_atom(&mut c)?);
    }
    c.expect(&Tok::Turnstile)?;
    let mut body = vec![raw_atom(&mut c)?];
    while c.eat(&Tok::Comma) {
        body.push(raw_atom(&mut c)?);
    }
    c.expect(&Tok::Dot)?;
    c.expect(&Tok::Eof)?;
    if let Some(a) = body.iter().find(|a| a.terms.is_empty()) {
        return Err(parse_error(a.at.line, a.at.col, format!("body atom {} has no variables", a.name)));
    }
    let mut names = Vec::new();
    let heads: Vec<Atom> = heads.iter().map(|a| resolve(a, &mut names)).collect::<Result<_>>()?;
    let body: Vec<Atom> = body.iter().map(|a| resolve(a, &mut names)).collect::<Result<_>>()?;
    let body = Schema::new(body)?;
    if heads.len() == 1 {
        let head = heads.into_iter().next().expect("one head");
        Ok(Program::Query(ConjunctiveQuery::new(names, head, body)?))
    } else {
        Ok(Program::Rule(DisjunctiveRule::new(names, body, Schema::new(heads)?)?))
    }
}

fn var_list(c: &mut Cursor, names: &[String], stop: &[Tok]) -> Result<VarSet> {
    let mut s = VarSet::EMPTY;
    if stop.contains(&c.peek().tok) {
        return Ok(s);
    }
    loop {
        let (n, sp) = c.ident()?;
        let v = names.iter().position(|x| *x == n).ok_or_else(|| parse_error(sp.line, sp.col, format!("unknown variable `{n}`")))?;
        s = s.with(v);
        if stop.contains(&c.peek().tok) {
            return Ok(s);
        }
        c.expect(&Tok::Comma)?;
    }
}

fn number(c: &mut Cursor) -> Result<Stat> {
    let t = c.next();
    match &t.tok {
        Tok::Number(s) => Ok(s.parse::<Stat>().expect("digits")),
        other => Err(parse_error(t.line, t.col, format!("expected a number, found {}", other.describe()))),
    }
}

/// Parses `card R <= N` and `deg R (Y1,..|X1,..) <= N` statements against
/// the body `schema`. A relation named by several atoms constrains each of
/// them; a degree statement constrains the atoms whose variables contain
/// `Y`.
pub fn parse_stats(text: &str, schema: &Schema, names: &[String]) -> Result<StatisticsProfile> {
    let mut c = Cursor::new(text)?;
    let mut out = Vec::new();
    loop {
        let t = c.peek().clone();
        let kind = match &t.tok {
            Tok::Eof => break,
            Tok::Ident(k) if k == "card" || k == "deg" => k.clone(),
            other => return Err(parse_error(t.line, t.col, format!("expected `card` or `deg`, found {}", other.describe()))),
        };
        c.next();
        let (rel, _) = c.ident()?;
        let atoms: Vec<usize> = schema.atoms().iter().enumerate().filter(|(_, a)| a.name == rel).map(|(i, _)| i).collect();
        if atoms.is_empty() {
            return Err(Error::UnknownRelation(rel));
        }
        if kind == "card" {
            c.expect(&Tok::Le)?;
            let n = number(&mut c)?;
            out.extend(atoms.iter().map(|&i| DegreeConstraint::cardinality(i, schema.atoms()[i].vars, n.clone())));
        } else {
            c.expect(&Tok::LParen)?;
            let y = var_list(&mut c, names, &[Tok::Pipe])?;
            c.expect(&Tok::Pipe)?;
            let x = var_list(&mut c, names, &[Tok::RParen])?;
            c.expect(&Tok::RParen)?;
            c.expect(&Tok::Le)?;
            let n = number(&mut c)?;
            if y.is_empty() {
                return Err(parse_error(t.line, t.col, "degree statement with no value variables"));
            }
            let guarded: Vec<usize> = atoms.into_iter().filter(|&i| y.is_subset(schema.atoms()[i].vars)).collect();
            if guarded.is_empty() {
                return Err(Error::NonGuardedConstraint(rel, format!("({}) is not contained in the relation", y.display(names))));
            }
            out.extend(guarded.into_iter().map(|i| DegreeConstraint::degree(i, y, x, n.clone())));
        }
    }
    let p = StatisticsProfile::new(out);
    p.validate(schema)?;
    Ok(p)
}

fn names_of(s: VarSet, names: &[String]) -> String {
    s.iter().map(|v| names[v].as_str()).collect::<Vec<_>>().join(",")
}

/// Statements that parse back to `profile`, one per line.
pub fn render_stats(profile: &StatisticsProfile, schema: &Schema, names: &[String]) -> String {
    let mut lines: Vec<String> = Vec::new();
    for c in &profile.constraints {
        let a = &schema.atoms()[c.guard];
        let l = if c.x.is_empty() && c.y == a.vars {
            format!("card {} <= {}", a.name, c.bound)
        } else {
            format!("deg {} ({}|{}) <= {}", a.name, names_of(c.y, names), names_of(c.x, names), c.bound)
        };
        if !lines.contains(&l) {
            lines.push(l);
        }
    }
    lines.into_iter().map(|l| l + "\n").collect()
}
