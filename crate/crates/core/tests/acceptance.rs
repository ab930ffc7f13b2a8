//! Acceptance run: one PASS/FAIL line per criterion, with its time limit.
//! Time limits assume an optimized build; the debug build prints the
//! elapsed time and applies the same limits.

use panda_core::entropy::{
    count_unconditional, find_witness, integralize, reset, reset_tracked, solve_polymatroid_bound, verify_identity, Basis, IntegralInequality, LinExpr,
    Measure, WitnessOutcome,
};
use panda_core::lp::Rational;
use panda_core::oracle::{check_shannon_direct, maxmin_primal, naive_cq, uncovered, Cone, InstanceGenerator};
use panda_core::panda::{evaluate_rule, rule_inequality, PandaOptions};
use panda_core::planner::{answer_cq, compute_fhtw, compute_subw};
use panda_core::query::{Atom, ConjunctiveQuery, DegreeConstraint, DisjunctiveRule, Schema, StatisticsProfile};
use panda_core::relation::{partition, Table, Tuple, Value};
use panda_core::varset::VarSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

const X: usize = 0;
const Y: usize = 1;
const Z: usize = 2;
const W: usize = 3;

/// Constant of the touch bound in criterion 6. The largest observed ratio
/// over the 50 seeds is about 0.22, so this leaves a margin above 4.
const TOUCH_C: f64 = 1.0;

fn s(v: &[usize]) -> VarSet {
    VarSet::from_vars(v.iter().copied())
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| ["X", "Y", "Z", "W", "U", "V"][i].to_string()).collect()
}

fn schema(atoms: &[(&str, &[usize])]) -> Schema {
    Schema::new(atoms.iter().map(|(n, v)| Atom::over(*n, s(v))).collect()).unwrap()
}

fn cycle_body(k: usize) -> Schema {
    Schema::new((0..k).map(|i| Atom::over(format!("R{i}"), s(&[i, (i + 1) % k]))).collect()).unwrap()
}

fn primal_constraints(p: &StatisticsProfile, unit: &Rational) -> Vec<(VarSet, VarSet, Rational)> {
    p.constraints.iter().map(|c| (c.y, c.x, unit.clone())).collect()
}

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_triangle() -> Outcome {
    let body = schema(&[("R", &[X, Y]), ("S", &[Y, Z]), ("T", &[X, Z])]);
    let rule = DisjunctiveRule::new(names(3), body.clone(), schema(&[("Q", &[X, Y, Z])])).unwrap();
    let p = StatisticsProfile::uniform_cardinalities(&body, 1000u32);
    let b = solve_polymatroid_bound(&rule, &p, Basis::Elemental).map_err(|e| e.to_string())?;
    let e = b.expr.common_exponent(&p).unwrap();
    check(e == r(3, 2), || format!("exponent {e}"))?;
    check(b.exponent == r(3, 2), || format!("LP optimum {}", b.exponent))?;
    let primal = maxmin_primal(3, &[s(&[X, Y, Z])], &primal_constraints(&p, &Rational::one()), Cone::Full).unwrap();
    check(primal == Some(r(3, 2)), || format!("primal oracle {primal:?}"))?;
    Ok(format!("exponent {e}, primal oracle agrees"))
}

fn c2_four_cycle() -> Outcome {
    let body = cycle_body(4);
    let q = ConjunctiveQuery::new(names(4), Atom::over("Q", s(&[X, Y])), body.clone()).unwrap();
    let p = StatisticsProfile::uniform_cardinalities(&body, 1u32 << 12);
    let sw = compute_subw(&q, &p, Basis::Elemental).map_err(|e| e.to_string())?;
    let fw = compute_fhtw(&q, &p, Basis::Elemental).map_err(|e| e.to_string())?;
    check(sw.value == r(3, 2), || format!("subw {}", sw.value))?;
    check(fw.value == r(2, 1), || format!("fhtw {}", fw.value))?;
    let primal = maxmin_primal(4, &sw.worst, &primal_constraints(&p, &Rational::one()), Cone::Full).unwrap();
    check(primal == Some(r(3, 2)), || format!("primal oracle on worst selection {primal:?}"))?;
    Ok(format!("subw {}·n, fhtw {}·n", sw.value, fw.value))
}

fn c3_cycles() -> Outcome {
    let mut notes = Vec::new();
    for k in 4..=6usize {
        let t = Instant::now();
        let body = cycle_body(k);
        let q = ConjunctiveQuery::new(names(k), Atom::over("Q", VarSet::EMPTY), body.clone()).unwrap();
        let p = StatisticsProfile::uniform_cardinalities(&body, 1u32 << 10);
        let sw = compute_subw(&q, &p, Basis::Elemental).map_err(|e| e.to_string())?;
        let h = k.div_ceil(2) as i64;
        let ub = r(2, 1) - r(1, h);
        check(sw.value <= ub, || format!("k={k}: subw {} above {ub}", sw.value))?;
        // the full cone at k = 6 takes minutes with the dense exact simplex
        let cone = if k < 6 { Cone::Full } else { Cone::Elemental };
        let primal = maxmin_primal(k, &sw.worst, &primal_constraints(&p, &Rational::one()), cone).unwrap();
        check(primal.as_ref() == Some(&sw.value), || format!("k={k}: primal oracle {primal:?} vs {}", sw.value))?;
        notes.push(format!("k={k} subw={} (bound {ub}, {} LPs, {:.2?})", sw.value, sw.lp_calls, t.elapsed()));
    }
    Ok(notes.join("; "))
}

fn known_witness() -> IntegralInequality {
    IntegralInequality::new(
        vec![s(&[X, Y, Z]), s(&[Y, Z, W])],
        vec![Measure::card(s(&[X, Y])), Measure::card(s(&[Y, Z])), Measure::card(s(&[Z, W]))],
        vec![],
        vec![Measure::sub(s(&[X]), s(&[Z]), s(&[Y])), Measure::sub(s(&[Y]), s(&[Z, W]), VarSet::EMPTY)],
    )
}

fn c4_witness() -> Outcome {
    // ½h(XYZ) + ½h(YZW) ≤ h(XY) + h(YZ) + h(ZW)
    let lambda = vec![(s(&[X, Y, Z]), r(1, 2)), (s(&[Y, Z, W]), r(1, 2))];
    let w = vec![(Measure::card(s(&[X, Y])), r(1, 1)), (Measure::card(s(&[Y, Z])), r(1, 1)), (Measure::card(s(&[Z, W])), r(1, 1))];
    let mut e = LinExpr::new();
    for (m, c) in &w {
        e.add_measure(m, c);
    }
    for (z, c) in &lambda {
        e.add_term(*z, &-c.clone());
    }
    let WitnessOutcome::Valid(wit) = find_witness(&e, 4, Basis::Elemental).map_err(|e| e.to_string())? else {
        return Err("inequality reported invalid".into());
    };
    let q = integralize(&lambda, &w, &wit).map_err(|e| e.to_string())?;
    check(verify_identity(&q), || "integral witness is not an identity".into())?;
    let cu = count_unconditional(&q);
    check(cu >= q.z.len(), || format!("{cu} unconditional terms for {} targets", q.z.len()))?;
    let known = known_witness();
    check(verify_identity(&known), || "injected witness is not an identity".into())?;
    Ok(format!("|Z|={} |D|={} |M|={} |S|={}, unconditional {cu}; injected witness verified", q.z.len(), q.d.len(), q.m.len(), q.s.len()))
}

/// Random rule over 3..=5 variables with a cardinality on every atom and
/// sometimes a degree constraint.
fn random_rule(rng: &mut ChaCha8Rng) -> (DisjunctiveRule, StatisticsProfile) {
    loop {
        let n = rng.gen_range(3..=5usize);
        let full = VarSet::full(n);
        let mut atoms: Vec<VarSet> = Vec::new();
        while atoms.iter().fold(VarSet::EMPTY, |a, b| a.union(*b)) != full || atoms.len() < 2 {
            let k = rng.gen_range(2..=3usize.min(n));
            let mut v = VarSet::EMPTY;
            while v.len() < k {
                v = v.with(rng.gen_range(0..n));
            }
            if !atoms.contains(&v) {
                atoms.push(v);
            }
        }
        let input = Schema::new(atoms.iter().enumerate().map(|(i, v)| Atom::over(format!("R{i}"), *v)).collect()).unwrap();
        let mut heads: Vec<VarSet> = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let mut h = VarSet::EMPTY;
            let size = rng.gen_range(2..=n);
            while h.len() < size {
                h = h.with(rng.gen_range(0..n));
            }
            if !heads.contains(&h) {
                heads.push(h);
            }
        }
        let output = Schema::new(heads.iter().enumerate().map(|(i, v)| Atom::over(format!("A{i}"), *v)).collect()).unwrap();
        let Ok(rule) = DisjunctiveRule::new(names(n), input, output) else { continue };
        let mut cs: Vec<DegreeConstraint> = atoms.iter().enumerate().map(|(i, v)| DegreeConstraint::cardinality(i, *v, 1u32 << rng.gen_range(2..8))).collect();
        if rng.gen_bool(0.5) {
            let i = rng.gen_range(0..atoms.len());
            let vs: Vec<usize> = atoms[i].iter().collect();
            cs.push(DegreeConstraint::degree(i, VarSet::singleton(vs[1]), VarSet::singleton(vs[0]), rng.gen_range(1..4u32)));
        }
        return (rule, StatisticsProfile::new(cs));
    }
}

fn multiset_sub(sub: &[Measure], sup: &[Measure]) -> bool {
    let mut left = sup.to_vec();
    sub.iter().all(|m| match left.iter().position(|x| x == m) {
        Some(i) => {
            left.remove(i);
            true
        }
        None => false,
    })
}

fn c5_reset() -> Outcome {
    // golden: triangle, drop h(XZ)
    let tri = IntegralInequality::new(
        vec![s(&[X, Y, Z]), s(&[X, Y, Z])],
        vec![Measure::card(s(&[X, Y])), Measure::card(s(&[Y, Z])), Measure::card(s(&[X, Z]))],
        vec![],
        vec![Measure::sub(s(&[Y]), s(&[Z]), s(&[X])), Measure::sub(s(&[X]), s(&[Y, Z]), VarSet::EMPTY)],
    );
    let a = reset(&tri, &Measure::card(s(&[X, Z]))).map_err(|e| e.to_string())?;
    check(a.z == vec![s(&[X, Y, Z])] && a.d == vec![Measure::card(s(&[X, Y])), Measure::card(s(&[Y, Z]))] && verify_identity(&a), || {
        format!("triangle reset gave {a:?}")
    })?;
    // golden: h(XYZW) + h(Y) + h(X;Z|Y) = h(XY) + h(YZ) + h(W|XYZ), drop h(XY)
    let second = IntegralInequality::new(
        vec![s(&[X, Y, Z, W]), s(&[Y])],
        vec![Measure::card(s(&[X, Y])), Measure::card(s(&[Y, Z])), Measure::mon(s(&[W]), s(&[X, Y, Z]))],
        vec![],
        vec![Measure::sub(s(&[X]), s(&[Z]), s(&[Y]))],
    );
    let b = reset(&second, &Measure::card(s(&[X, Y]))).map_err(|e| e.to_string())?;
    check(b.z == vec![s(&[Y])] && b.d == vec![Measure::card(s(&[Y, Z]))] && verify_identity(&b), || format!("second reset gave {b:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5e5e7);
    let mut done = 0;
    let mut rules = 0;
    while done < 200 {
        let (rule, p) = random_rule(&mut rng);
        let q = match rule_inequality(&rule, &p, Basis::Elemental) {
            Ok(q) => q,
            Err(e) => return Err(format!("witness for {rule}: {e}")),
        };
        rules += 1;
        for (i, d) in q.d.iter().enumerate() {
            if !d.is_unconditional() || done == 200 {
                continue;
            }
            let out = reset_tracked(&q, i).map_err(|e| format!("{rule}: {e}"))?;
            let mut rest = q.d.clone();
            rest.remove(i);
            check(multiset_sub(&out.ineq.d, &rest), || format!("{rule}: D' is not inside D minus the dropped term"))?;
            check(out.kept.iter().all(|&k| k != i) && out.kept.iter().zip(&out.ineq.d).all(|(&k, m)| q.d[k] == *m), || {
                format!("{rule}: kept indices are wrong")
            })?;
            check(out.ineq.z.len() + 1 >= q.z.len(), || format!("{rule}: lost more than one output term"))?;
            check(verify_identity(&out.ineq), || format!("{rule}: identity broken"))?;
            done += 1;
        }
    }
    Ok(format!("2 golden cases; 200 random resets over {rules} rules"))
}

fn c6_ddr() -> Outcome {
    let body = schema(&[("R", &[X, Y]), ("S", &[Y, Z]), ("U", &[Z, W])]);
    let rule = DisjunctiveRule::new(names(4), body.clone(), schema(&[("A", &[X, Y, Z]), ("B", &[Y, Z, W])])).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let n = [16usize, 64, 256][seed as usize % 3];
        let skew = [0.0, 0.3, 0.6][(seed as usize / 3) % 3];
        let dom = (2 * n) as u32;
        let inst = InstanceGenerator::new(seed, dom, n, skew).generate(&body);
        if inst.tables.iter().any(|t| t.len() != n) {
            return Err(format!("seed {seed}: generator did not reach {n} rows"));
        }
        let p = StatisticsProfile::uniform_cardinalities(&body, n as u32);
        let opts = PandaOptions { check_invariants: true, ..Default::default() };
        let (model, rep) = evaluate_rule(&rule, &inst, &p, Basis::Elemental, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        if let Some(t) = uncovered(&inst, &rule, &model.tables).map_err(|e| format!("seed {seed}: {e}"))? {
            return Err(format!("seed {seed}: tuple {t:?} not covered"));
        }
        let nf = n as f64;
        let bound = inst.total_size() as f64 + nf.powf(1.5) * nf.log2().powi(2);
        let touches = (rep.input_touches + rep.tree_touches) as f64;
        worst = worst.max(touches / bound);
        check(touches <= TOUCH_C * bound, || format!("seed {seed} N={n} skew={skew}: {touches} touches > {TOUCH_C}·{bound:.0}"))?;
    }
    Ok(format!("50 instances covered; max touches/(‖Σ‖+N^1.5·log²N) = {worst:.3} ≤ C = {TOUCH_C}"))
}

fn cq_fixtures() -> Vec<(&'static str, ConjunctiveQuery, Option<DegreeConstraint>)> {
    let tri = schema(&[("R", &[X, Y]), ("S", &[Y, Z]), ("T", &[X, Z])]);
    let path = schema(&[("R", &[X, Y]), ("S", &[Y, Z]), ("T", &[Z, W])]);
    vec![
        ("triangle full", ConjunctiveQuery::new(names(3), Atom::over("Q", s(&[X, Y, Z])), tri).unwrap(), None),
        ("4-cycle Q(X,Y)", ConjunctiveQuery::new(names(4), Atom::over("Q", s(&[X, Y])), cycle_body(4)).unwrap(), None),
        ("5-cycle boolean", ConjunctiveQuery::new(names(5), Atom::over("Q", VarSet::EMPTY), cycle_body(5)).unwrap(), None),
        (
            "path with FD",
            ConjunctiveQuery::new(names(4), Atom::over("Q", s(&[X, W])), path).unwrap(),
            Some(DegreeConstraint::degree(1, s(&[Z]), s(&[Y]), 1u32)),
        ),
    ]
}

fn c7_cq() -> Outcome {
    let mut notes = Vec::new();
    for (fi, (label, q, fd)) in cq_fixtures().into_iter().enumerate() {
        let mut nonempty = 0;
        for k in 0..50u64 {
            let seed = 1000 * fi as u64 + k;
            let n = [8usize, 16, 32][k as usize % 3];
            let dom = [4u32, 8, 16][(k as usize / 3) % 3];
            let skew = if k % 5 == 4 { 0.4 } else { 0.0 };
            let base = fd.iter().cloned().collect::<Vec<_>>();
            let inst = InstanceGenerator::new(seed, dom, n, skew).generate_within(&q.body, &StatisticsProfile::new(base.clone()));
            let m = inst.tables.iter().map(Table::len).max().unwrap().max(1) as u32;
            let mut cs = StatisticsProfile::uniform_cardinalities(&q.body, m).constraints;
            cs.extend(base);
            let p = StatisticsProfile::new(cs);
            let got = answer_cq(&q, &inst, &p).map_err(|e| format!("{label} seed {seed}: {e}"))?;
            let want = naive_cq(&q, &inst).map_err(|e| format!("{label} seed {seed}: {e}"))?;
            check(got.vars() == want.vars() && got.sorted_rows() == want.sorted_rows(), || {
                format!("{label} seed {seed}: {} rows vs oracle {}", got.len(), want.len())
            })?;
            if !want.is_empty() {
                nonempty += 1;
            }
        }
        notes.push(format!("{label} 50/50 ({nonempty} nonempty)"));
    }
    Ok(notes.join("; "))
}

fn c8_partition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut max_parts = 0;
    for k in 0..100 {
        let skewed = k % 2 == 1;
        let len = rng.gen_range(1..300usize);
        let rows: Vec<Tuple> = (0..len)
            .map(|_| {
                let x = if skewed && rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..40) };
                let y = rng.gen_range(0..200);
                vec![x, y].into_boxed_slice()
            })
            .collect();
        let t = Table::new(s(&[X, Y]), rows);
        let parts = partition(&t, s(&[X])).map_err(|e| e.to_string())?;
        let mut seen: HashSet<&[Value]> = HashSet::new();
        for p in &parts {
            for row in p.rows() {
                check(seen.insert(row), || format!("table {k}: row {row:?} in two parts"))?;
            }
            // brute-force |π_X(P)| and max degree
            let mut groups: HashMap<Value, usize> = HashMap::new();
            for row in p.rows() {
                *groups.entry(row[0]).or_default() += 1;
            }
            let deg = groups.values().copied().max().unwrap_or(0);
            let lhs = num_bigint::BigUint::from(groups.len()) * num_bigint::BigUint::from(deg);
            check(&lhs <= t.stat(), || format!("table {k}: part with {} keys of degree {deg} exceeds {}", groups.len(), t.stat()))?;
        }
        check(seen.len() == t.len() && t.rows().iter().all(|r| seen.contains(&r[..])), || format!("table {k}: union differs"))?;
        let cap = (2 * (t.len() as f64).log2().ceil() as usize).max(1);
        check(parts.len() <= cap, || format!("table {k}: {} parts for {} rows", parts.len(), t.len()))?;
        max_parts = max_parts.max(parts.len());
    }
    Ok(format!("100 tables, at most {max_parts} parts"))
}

fn c9_shannon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut valid, mut invalid) = (0, 0);
    for k in 0..100 {
        let n = rng.gen_range(2..=5usize);
        let full = VarSet::full(n);
        let rand_set = |rng: &mut ChaCha8Rng| loop {
            let v = VarSet::from_bits(rng.gen_range(1..=full.bits()));
            if !v.is_empty() {
                return v;
            }
        };
        let mut e = LinExpr::new();
        if k % 2 == 0 {
            // nonnegative combination of random Shannon measures, then a
            // random perturbation half of the time
            for _ in 0..rng.gen_range(1..5) {
                let a = rand_set(&mut rng);
                let b = rand_set(&mut rng);
                let m = if a.is_subset(b) || b.is_subset(a) {
                    let (lo, hi) = if a.is_subset(b) { (a, b) } else { (b, a) };
                    if lo == hi {
                        continue;
                    }
                    Measure::mon(hi.minus(lo), lo)
                } else {
                    let x = a.intersect(b);
                    Measure::sub(a.minus(x), b.minus(x), x)
                };
                e.add_measure(&m, &Rational::from_int(rng.gen_range(1..4)));
            }
            if rng.gen_bool(0.5) {
                e.add_term(rand_set(&mut rng), &Rational::from_int(-1));
            }
        } else {
            for _ in 0..rng.gen_range(2..7) {
                e.add_term(rand_set(&mut rng), &Rational::from_int(rng.gen_range(-3..4)));
            }
        }
        let direct = check_shannon_direct(&e, n).map_err(|e| e.to_string())?;
        let via_witness = matches!(find_witness(&e, n, Basis::Elemental).map_err(|e| e.to_string())?, WitnessOutcome::Valid(_));
        check(direct == via_witness, || format!("inequality {k} over {n} vars: direct {direct}, witness {via_witness}"))?;
        if direct {
            valid += 1;
        } else {
            invalid += 1;
        }
    }
    Ok(format!("100 agree ({valid} valid, {invalid} invalid)"))
}

fn main() {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("triangle polymatroid bound is 3/2", 1, c1_triangle),
        ("4-cycle Q(X,Y): subw 3/2, fhtw 2", 10, c2_four_cycle),
        ("boolean k-cycles k=4..6: subw within 2-1/ceil(k/2)", 60, c3_cycles),
        ("witness pipeline for the two-headed rule", 1, c4_witness),
        ("reset golden cases and 200 random resets", 30, c5_reset),
        ("two-headed rule on 50 instances: coverage and touch bound", 120, c6_ddr),
        ("answer_cq equals naive_cq on 200 instances", 300, c7_cq),
        ("partition properties on 100 tables", 10, c8_partition),
        ("find_witness agrees with direct LP on 100 inequalities", 60, c9_shannon),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let el = t.elapsed();
        let late = el > Duration::from_secs(*limit);
        match (&out, late) {
            (Ok(note), false) => println!("PASS {}: {name} [{el:.2?} < {limit}s] {note}", i + 1),
            (Ok(note), true) => {
                failed += 1;
                println!("FAIL {}: {name} [{el:.2?} exceeds {limit}s] {note}", i + 1);
            }
            (Err(e), _) => {
                failed += 1;
                println!("FAIL {}: {name} [{el:.2?}] {e}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
