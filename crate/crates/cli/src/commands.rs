use crate::output::Kv;
use crate::{Cli, Command, Inputs, RunConfig, VerifyFailed};
use anyhow::{bail, Context, Result};
use panda_core::entropy::{count_unconditional, solve_polymatroid_bound, verify_identity, LogScale, LogStats, Measure};
use panda_core::io::{load_relations, parse_program, parse_stats, read_csv, table_to_csv, Interner, LoadedData, Program};
use panda_core::oracle::{naive_cq, naive_full_join, verify_model, InstanceGenerator};
use panda_core::panda::{evaluate_rule, rule_inequality, PandaOptions};
use panda_core::planner::{compute_fhtw, compute_subw, CqPlan, TreeDecomposition};
use panda_core::relation::project;
use panda_core::{Atom, ConjunctiveQuery, DisjunctiveRule, Schema, StatisticsProfile, Table, Tuple, VarSet};
use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

struct Loaded {
    program: Program,
    profile: StatisticsProfile,
}

fn load(inputs: &Inputs, config: &RunConfig, needs_lp: bool) -> Result<Loaded> {
    let text = fs::read_to_string(&inputs.query).map_err(|e| panda_core::Error::Io(format!("{}: {e}", inputs.query.display())))?;
    let program = parse_program(&text).with_context(|| inputs.query.display().to_string())?;
    let stats = fs::read_to_string(&inputs.stats).map_err(|e| panda_core::Error::Io(format!("{}: {e}", inputs.stats.display())))?;
    let profile = parse_stats(&stats, program.body(), program.names()).with_context(|| inputs.stats.display().to_string())?;
    let n = program.names().len();
    if needs_lp && n > config.max_vars {
        return Err(panda_core::Error::UniverseTooLarge { vars: n, limit: config.max_vars }.into());
    }
    Ok(Loaded { program, profile })
}

/// A query read as the rule with its head as the only output atom.
fn as_rule(p: &Program) -> Result<DisjunctiveRule> {
    Ok(match p {
        Program::Rule(r) => r.clone(),
        Program::Query(q) => DisjunctiveRule::new(q.names.clone(), q.body.clone(), Schema::new(vec![q.head.clone()])?)?,
    })
}

fn as_query(p: &Program, cmd: &str) -> Result<ConjunctiveQuery> {
    match p {
        Program::Query(q) => Ok(q.clone()),
        Program::Rule(_) => Err(panda_core::Error::PreconditionViolated(format!("`{cmd}` takes a conjunctive query, not a disjunctive rule")).into()),
    }
}

fn opts(config: &RunConfig) -> PandaOptions {
    PandaOptions { parallel: config.parallel, trace: config.trace, check_invariants: false }
}

fn unit(stats: &LogStats) -> String {
    match &stats.scale {
        LogScale::Common(n) => format!("log2({n})"),
        LogScale::Bits => "bits".to_string(),
    }
}

fn bags(td: &TreeDecomposition, names: &[String]) -> String {
    let b: Vec<String> = td.bags.iter().map(|b| b.display(names).to_string()).collect();
    let e: Vec<String> = td.edges.iter().map(|(x, y)| format!("{x}-{y}")).collect();
    format!("bags [{}] edges [{}]", b.join(", "), e.join(", "))
}

fn multiset(items: &[Measure], names: &[String]) -> String {
    let mut counts: Vec<(Measure, usize)> = Vec::new();
    for m in items {
        match counts.iter_mut().find(|(x, _)| x == m) {
            Some((_, k)) => *k += 1,
            None => counts.push((*m, 1)),
        }
    }
    counts.sort();
    if counts.is_empty() {
        return "-".into();
    }
    counts.iter().map(|(m, k)| if *k == 1 { format!("h{}", m.display(names)) } else { format!("{k}*h{}", m.display(names)) }).collect::<Vec<_>>().join(" + ")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| panda_core::Error::Io(format!("{}: {e}", path.display())).into())
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| panda_core::Error::Io(format!("{}: {e}", dir.display())).into())
}

fn load_data(data: &Path, l: &Loaded) -> Result<LoadedData> {
    Ok(load_relations(data, l.program.body(), l.program.names(), &l.profile)?)
}

fn write_atoms(out: &Path, atoms: &[Atom], tables: &[Table], names: &[String], interner: &Interner, kv: &mut Kv) -> Result<()> {
    out_dir(out)?;
    for (a, t) in atoms.iter().zip(tables) {
        let path = out.join(format!("{}.csv", a.name));
        write_file(&path, &table_to_csv(t, &a.terms, names, interner))?;
        kv.put(format!("rows.{}", a.name), t.len())?;
    }
    Ok(())
}

/// Rows of `<dir>/<atom>.csv` as tuples over the atom, dropping rows with a
/// value never seen in the data. The second component counts dropped rows.
fn read_result(dir: &Path, atom: &Atom, names: &[String], interner: &Interner) -> Result<(Table, usize)> {
    let path = dir.join(format!("{}.csv", atom.name));
    let (header, rows) = read_csv(&path)?;
    if atom.terms.is_empty() {
        if header != ["answer"] || rows.len() != 1 || !matches!(rows[0][0].as_str(), "true" | "false") {
            bail!(VerifyFailed(format!("{}: expected a single true/false answer", path.display())));
        }
        return Ok((if rows[0][0] == "true" { Table::unit() } else { Table::empty(VarSet::EMPTY) }, 0));
    }
    let expected: Vec<String> = atom.terms.iter().map(|&v| names[v].clone()).collect();
    if header != expected {
        return Err(panda_core::Error::HeaderMismatch { file: path.display().to_string(), expected: expected.join(","), found: header.join(",") }.into());
    }
    let mut tuples = Vec::new();
    let mut foreign = 0;
    'rows: for r in &rows {
        let mut by_var = vec![0; names.len()];
        for (j, s) in r.iter().enumerate() {
            match interner.lookup(s) {
                Some(v) => by_var[atom.terms[j]] = v,
                None => {
                    foreign += 1;
                    continue 'rows;
                }
            }
        }
        tuples.push(atom.vars.iter().map(|v| by_var[v]).collect::<Tuple>());
    }
    Ok((Table::new(atom.vars, tuples), foreign))
}

fn bound(l: &Loaded, config: &RunConfig, kv: &mut Kv) -> Result<()> {
    let rule = as_rule(&l.program)?;
    let b = solve_polymatroid_bound(&rule, &l.profile, config.basis)?;
    kv.put("program", &l.program)?;
    kv.put("basis", config.basis)?;
    kv.put("unit", unit(&b.stats))?;
    kv.put("exponent", &b.exponent)?;
    for ((_, lam), a) in b.lambda.iter().zip(rule.output.atoms()) {
        kv.put(format!("lambda.{}", a.name), lam)?;
    }
    for (w, c) in b.expr.w.iter().zip(&l.profile.constraints) {
        kv.put(format!("w.{}", c.label(&rule.input, &rule.names)), w)?;
    }
    kv.put("symbolic", b.expr.symbolic(&l.profile, &rule.input, &rule.names))?;
    kv.put("value", b.expr.value(&l.profile))?;
    Ok(())
}

fn witness(l: &Loaded, config: &RunConfig, kv: &mut Kv) -> Result<()> {
    let rule = as_rule(&l.program)?;
    let q = rule_inequality(&rule, &l.profile, config.basis)?;
    let names = &rule.names;
    let zs: Vec<String> = {
        let mut z: Vec<VarSet> = q.z.clone();
        z.sort();
        z.iter().map(|s| format!("h({})", s.display(names))).collect()
    };
    kv.put("program", &l.program)?;
    kv.put("basis", config.basis)?;
    kv.put("inequality", q.display(names))?;
    kv.put("Z", zs.join(" + "))?;
    kv.put("D", multiset(&q.d, names))?;
    kv.put("M", multiset(&q.m, names))?;
    kv.put("S", multiset(&q.s, names))?;
    kv.put("size", format!("|Z|={} |D|={} |M|={} |S|={}", q.z.len(), q.d.len(), q.m.len(), q.s.len()))?;
    kv.put("unconditional", count_unconditional(&q))?;
    kv.put("identity", verify_identity(&q))?;
    if !verify_identity(&q) {
        return Err(panda_core::Error::InvalidWitness("integral witness is not an identity".into()).into());
    }
    Ok(())
}

fn subw(l: &Loaded, config: &RunConfig, kv: &mut Kv) -> Result<()> {
    let q = as_query(&l.program, "subw")?;
    let r = compute_subw(&q, &l.profile, config.basis)?;
    kv.put("program", &l.program)?;
    kv.put("basis", config.basis)?;
    kv.put("unit", unit(&r.stats))?;
    kv.put("subw", &r.value)?;
    kv.put("worst", r.worst.iter().map(|b| b.display(&q.names).to_string()).collect::<Vec<_>>().join(" "))?;
    kv.put("lp_calls", r.lp_calls)?;
    kv.put("tds", r.tds.len())?;
    for (i, td) in r.tds.iter().enumerate() {
        kv.put(format!("td.{}", i + 1), bags(td, &q.names))?;
    }
    Ok(())
}

fn fhtw(l: &Loaded, config: &RunConfig, kv: &mut Kv) -> Result<()> {
    let q = as_query(&l.program, "fhtw")?;
    let r = compute_fhtw(&q, &l.profile, config.basis)?;
    kv.put("program", &l.program)?;
    kv.put("basis", config.basis)?;
    kv.put("unit", unit(&r.stats))?;
    kv.put("fhtw", &r.value)?;
    kv.put("td", bags(&r.td, &q.names))?;
    Ok(())
}

fn run_program(l: &Loaded, config: &RunConfig, data: &Path, out: &Path, kv: &mut Kv) -> Result<()> {
    let d = load_data(data, l)?;
    let names = l.program.names();
    kv.put("program", &l.program)?;
    kv.put("input_rows", d.instance.total_size())?;
    for (rel, k) in d.duplicates.iter().filter(|(_, k)| *k > 0) {
        kv.put(format!("duplicates.{rel}"), k)?;
    }
    match &l.program {
        Program::Query(q) => {
            let plan = CqPlan::build(q, &l.profile, config.basis)?;
            let (t, rep) = plan.execute(&d.instance, &opts(config))?;
            kv.put("width", plan.max_opt())?;
            kv.put("unit", unit(&plan.stats))?;
            kv.put("tds", plan.tds.len())?;
            kv.put("rules", rep.rules_run)?;
            kv.put("engine_nodes", rep.engine_nodes)?;
            kv.put("engine_touches", rep.engine_touches)?;
            write_atoms(out, std::slice::from_ref(&q.head), std::slice::from_ref(&t), names, &d.interner, kv)?;
        }
        Program::Rule(r) => {
            let (model, rep) = evaluate_rule(r, &d.instance, &l.profile, config.basis, &opts(config))?;
            kv.put("nodes", rep.nodes)?;
            kv.put("leaves", rep.leaves)?;
            kv.put("max_depth", rep.max_depth)?;
            kv.put("input_touches", rep.input_touches)?;
            kv.put("tree_touches", rep.tree_touches)?;
            write_atoms(out, r.output.atoms(), &model.tables, names, &d.interner, kv)?;
            for line in &rep.trace {
                kv.line(format!("trace {}", line.render(names)))?;
            }
        }
    }
    Ok(())
}

fn verify(l: &Loaded, data: &Path, result: &Path, kv: &mut Kv) -> Result<()> {
    let d = load_data(data, l)?;
    let names = l.program.names();
    kv.put("program", &l.program)?;
    match &l.program {
        Program::Query(q) => {
            let (got, foreign) = read_result(result, &q.head, names, &d.interner)?;
            let want = naive_cq(q, &d.instance)?;
            let g: BTreeSet<&[u32]> = got.rows().iter().map(|r| &r[..]).collect();
            let w: BTreeSet<&[u32]> = want.rows().iter().map(|r| &r[..]).collect();
            let missing = w.difference(&g).count();
            let extra = g.difference(&w).count() + foreign;
            kv.put("expected_rows", want.len())?;
            kv.put("missing", missing)?;
            kv.put("extra", extra)?;
            kv.put("verified", missing == 0 && extra == 0)?;
            if missing + extra > 0 {
                bail!(VerifyFailed(format!("{missing} missing and {extra} unexpected rows")));
            }
        }
        Program::Rule(r) => {
            let mut tables = Vec::new();
            for a in r.output.atoms() {
                tables.push(read_result(result, a, names, &d.interner)?.0);
            }
            let ok = verify_model(&d.instance, r, &tables)?;
            kv.put("verified", ok)?;
            if !ok {
                bail!(VerifyFailed("some tuple of the body join is covered by no output atom".into()));
            }
        }
    }
    Ok(())
}

fn oracle(l: &Loaded, data: &Path, out: &Path, kv: &mut Kv) -> Result<()> {
    let d = load_data(data, l)?;
    let names = l.program.names();
    kv.put("program", &l.program)?;
    match &l.program {
        Program::Query(q) => {
            let t = naive_cq(q, &d.instance)?;
            write_atoms(out, std::slice::from_ref(&q.head), std::slice::from_ref(&t), names, &d.interner, kv)?;
        }
        Program::Rule(r) => {
            // projecting the join onto every head is always a model
            let join = naive_full_join(&d.instance)?;
            let tables = r.output.atoms().iter().map(|a| project(&join, a.vars)).collect::<panda_core::Result<Vec<_>>>()?;
            write_atoms(out, r.output.atoms(), &tables, names, &d.interner, kv)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn generate(l: &Loaded, config: &RunConfig, out: &Path, tuples: usize, domain: u32, skew: f64, kv: &mut Kv) -> Result<()> {
    if !(0.0..=1.0).contains(&skew) {
        return Err(panda_core::Error::PreconditionViolated(format!("skew {skew} is outside [0, 1]")).into());
    }
    let body = l.program.body();
    let inst = InstanceGenerator::new(config.seed, domain, tuples, skew).generate_within(body, &l.profile);
    // code v prints as the decimal v
    let mut interner = Interner::new();
    for v in 0..domain.max(1) {
        interner.intern(&v.to_string());
    }
    out_dir(out)?;
    let mut written: Vec<&str> = Vec::new();
    for (a, t) in body.atoms().iter().zip(&inst.tables) {
        if written.contains(&a.name.as_str()) {
            continue;
        }
        written.push(&a.name);
        write_file(&out.join(format!("{}.csv", a.name)), &table_to_csv(t, &a.terms, l.program.names(), &interner))?;
        kv.put(format!("rows.{}", a.name), t.len())?;
    }
    kv.put("seed", config.seed)?;
    Ok(())
}

pub fn run(cli: &Cli, w: &mut dyn Write) -> Result<()> {
    let c = &cli.config;
    let mut kv = Kv::new(w);
    match &cli.command {
        Command::Bound(i) => bound(&load(i, c, true)?, c, &mut kv),
        Command::Witness(i) => witness(&load(i, c, true)?, c, &mut kv),
        Command::Subw(i) => subw(&load(i, c, true)?, c, &mut kv),
        Command::Fhtw(i) => fhtw(&load(i, c, true)?, c, &mut kv),
        Command::Run { inputs, data, out } => run_program(&load(inputs, c, true)?, c, data, out, &mut kv),
        Command::Verify { inputs, data, result } => verify(&load(inputs, c, false)?, data, result, &mut kv),
        Command::Oracle { inputs, data, out } => oracle(&load(inputs, c, false)?, data, out, &mut kv),
        Command::Generate { inputs, out, tuples, domain, skew } => generate(&load(inputs, c, false)?, c, out, *tuples, *domain, *skew, &mut kv),
    }
}
