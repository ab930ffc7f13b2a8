//! Shannon witnesses: finding them by LP, clearing denominators, and checking
//! the resulting symbolic identity.

use super::measure::{basis_measures, Basis, LinExpr, Measure, PolymatroidVector};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpError, Rational, Relation, Sense};
use crate::varset::VarSet;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::fmt;

/// Variables allowed on LP-backed paths.
pub const MAX_LP_VARS: usize = 10;

/// Non-negative coefficients on basic measures.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Witness {
    pub m: Vec<(Measure, Rational)>,
    pub s: Vec<(Measure, Rational)>,
}

impl Witness {
    /// `Σ m·h(μ) + Σ s·h(σ)`.
    pub fn expr(&self) -> LinExpr {
        let mut e = LinExpr::new();
        for (mu, c) in self.m.iter().chain(&self.s) {
            e.add_measure(mu, c);
        }
        e
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessOutcome {
    Valid(Witness),
    /// A polymatroid on which the expression is negative.
    Invalid(PolymatroidVector),
}

pub(crate) fn check_lp_size(n: usize) -> Result<()> {
    if n > MAX_LP_VARS {
        return Err(Error::UniverseTooLarge { vars: n, limit: MAX_LP_VARS });
    }
    Ok(())
}

/// Decides whether `Σ a_X h(X) ≥ 0` holds for all polymatroids over
/// `{0, .., n-1}` and, if so, expresses the left side as a non-negative
/// combination of basic measures.
pub fn find_witness(a: &LinExpr, n: usize, basis: Basis) -> Result<WitnessOutcome> {
    check_lp_size(n)?;
    if !a.vars().is_subset(VarSet::full(n)) {
        return Err(Error::PreconditionViolated("expression mentions variables outside the universe".into()));
    }
    let measures = basis_measures(n, basis);
    let rows = (1usize << n) - 1;
    let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); rows];
    for (j, mu) in measures.iter().enumerate() {
        for (s, c) in mu.expr().iter() {
            cols[s.bits() as usize - 1].push((j, c.clone()));
        }
    }
    let mut lp = LinearProgram::new(measures.len(), Sense::Maximize);
    for (r, coeffs) in cols.into_iter().enumerate() {
        let s = VarSet::from_bits(r as u32 + 1);
        lp.add(coeffs, Relation::Eq, a.get(s));
    }
    match solve_lp(&lp) {
        Ok(sol) => {
            let mut w = Witness::default();
            for (mu, x) in measures.into_iter().zip(sol.x) {
                if x.is_zero() {
                    continue;
                }
                if mu.is_mon() {
                    w.m.push((mu, x));
                } else {
                    w.s.push((mu, x));
                }
            }
            Ok(WitnessOutcome::Valid(w))
        }
        Err(LpError::Infeasible { certificate }) => {
            let mut h = PolymatroidVector::zeros(n);
            for (r, v) in certificate.into_iter().enumerate() {
                h.set(VarSet::from_bits(r as u32 + 1), v);
            }
            Ok(WitnessOutcome::Invalid(h))
        }
        Err(LpError::Unbounded) => unreachable!("feasibility problem has a zero objective"),
    }
}

/// Integral form of a Shannon inequality:
/// `Σ_𝒵 h(Z) + Σ_ℳ h(μ) + Σ_𝒮 h(σ) = Σ_𝒟 h(δ)`, all multisets.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntegralInequality {
    pub z: Vec<VarSet>,
    /// Statistics terms; always monotonicity measures.
    pub d: Vec<Measure>,
    pub m: Vec<Measure>,
    pub s: Vec<Measure>,
}

impl IntegralInequality {
    pub fn new(z: Vec<VarSet>, d: Vec<Measure>, m: Vec<Measure>, s: Vec<Measure>) -> IntegralInequality {
        debug_assert!(d.iter().chain(&m).all(Measure::is_mon));
        debug_assert!(s.iter().all(|x| !x.is_mon()));
        IntegralInequality { z, d, m, s }
    }

    /// Left side minus right side; zero exactly when the identity holds.
    pub fn residual(&self) -> LinExpr {
        let one = Rational::one();
        let neg = Rational::from_int(-1);
        let mut e = LinExpr::new();
        for z in &self.z {
            e.add_term(*z, &one);
        }
        for mu in self.m.iter().chain(&self.s) {
            e.add_measure(mu, &one);
        }
        for d in &self.d {
            e.add_measure(d, &neg);
        }
        e
    }

    pub fn potential(&self) -> usize {
        self.d.len() + self.m.len() + 2 * self.s.len()
    }

    /// Same multisets in a canonical order, for comparisons.
    pub fn canonical(&self) -> IntegralInequality {
        let mut c = self.clone();
        c.z.sort();
        c.d.sort();
        c.m.sort();
        c.s.sort();
        c
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> IneqDisplay<'a> {
        IneqDisplay { q: self, names }
    }
}

pub fn verify_identity(ineq: &IntegralInequality) -> bool {
    ineq.residual().is_zero()
}

/// Number of statistics terms with an empty conditioning set.
pub fn count_unconditional(ineq: &IntegralInequality) -> usize {
    ineq.d.iter().filter(|d| d.is_unconditional()).count()
}

/// Upper limit on the total multiplicity produced by [`integralize`].
pub const MAX_MULTIPLICITY: u64 = 1 << 20;

/// Scales `λ`, `w` and the witness by the LCM of all denominators and
/// expands them into multisets.
pub fn integralize(lambda: &[(VarSet, Rational)], w: &[(Measure, Rational)], wit: &Witness) -> Result<IntegralInequality> {
    let all = lambda.iter().map(|p| &p.1).chain(w.iter().map(|p| &p.1)).chain(wit.m.iter().map(|p| &p.1)).chain(wit.s.iter().map(|p| &p.1));
    let values: Vec<&Rational> = all.collect();
    if values.iter().any(|v| v.is_negative()) {
        return Err(Error::InvalidWitness("negative coefficient".into()));
    }
    let l = Rational::from_bigint(Rational::lcm_denominators(values.iter().copied()));
    let mut total = 0u64;
    let mut count = |c: &Rational| -> Result<usize> {
        let k = (c * &l).numer();
        let k = k.to_u64().ok_or_else(|| Error::InvalidWitness("multiplicity too large".into()))?;
        total += k;
        if total > MAX_MULTIPLICITY {
            return Err(Error::InvalidWitness("total multiplicity too large".into()));
        }
        Ok(k as usize)
    };
    let mut q = IntegralInequality::default();
    for (z, c) in lambda {
        let k = count(c)?;
        q.z.extend(std::iter::repeat_n(*z, k));
    }
    for (d, c) in w {
        if !d.is_mon() {
            return Err(Error::InvalidWitness("statistics term must be a monotonicity measure".into()));
        }
        let k = count(c)?;
        q.d.extend(std::iter::repeat_n(*d, k));
    }
    for (mu, c) in &wit.m {
        let k = count(c)?;
        q.m.extend(std::iter::repeat_n(*mu, k));
    }
    for (s, c) in &wit.s {
        let k = count(c)?;
        q.s.extend(std::iter::repeat_n(*s, k));
    }
    Ok(q)
}

/// The LCM used by [`integralize`], exposed for reporting.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> BigInt {
    Rational::lcm_denominators(values)
}

pub struct IneqDisplay<'a> {
    q: &'a IntegralInequality,
    names: &'a [String],
}

fn grouped<T: Ord + Copy>(items: &[T]) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for it in items {
        *m.entry(*it).or_insert(0) += 1;
    }
    m
}

impl fmt::Display for IneqDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names;
        let mult = |k: usize| if k == 1 { String::new() } else { format!("{k}*") };
        let z: Vec<String> = grouped(&self.q.z).into_iter().map(|(s, k)| format!("{}h({})", mult(k), s.display(names))).collect();
        let d: Vec<String> = grouped(&self.q.d).into_iter().map(|(m, k)| format!("{}h{}", mult(k), m.display(names))).collect();
        write!(f, "{} <= {}", if z.is_empty() { "0".into() } else { z.join(" + ") }, if d.is_empty() { "0".into() } else { d.join(" + ") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::measure::{eval_measure, is_polymatroid};

    const X: usize = 0;
    const Y: usize = 1;
    const Z: usize = 2;
    const W: usize = 3;

    fn s(v: &[usize]) -> VarSet {
        VarSet::from_vars(v.iter().copied())
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn shearer() -> LinExpr {
        let mut a = LinExpr::new();
        for p in [s(&[X, Y]), s(&[Y, Z]), s(&[X, Z])] {
            a.add_term(p, &Rational::one());
        }
        a.add_term(s(&[X, Y, Z]), &Rational::from_int(-2));
        a
    }

    /// The two-submodularity witness for ½h(XYZ) + ½h(YZW) ≤ ½(h(XY) + h(YZ) + h(ZW)).
    fn four_var_witness() -> IntegralInequality {
        IntegralInequality::new(
            vec![s(&[X, Y, Z]), s(&[Y, Z, W])],
            vec![Measure::card(s(&[X, Y])), Measure::card(s(&[Y, Z])), Measure::card(s(&[Z, W]))],
            vec![],
            vec![Measure::sub(s(&[X]), s(&[Z]), s(&[Y])), Measure::sub(s(&[Y]), s(&[Z, W]), VarSet::EMPTY)],
        )
    }

    #[test]
    fn shearer_has_witness() {
        let WitnessOutcome::Valid(w) = find_witness(&shearer(), 3, Basis::Elemental).unwrap() else { panic!("expected valid") };
        assert_eq!(w.expr(), shearer());
        let WitnessOutcome::Valid(f) = find_witness(&shearer(), 3, Basis::Full).unwrap() else { panic!("expected valid") };
        assert_eq!(f.expr(), shearer());
        // the hand witness also works
        let mut hand = LinExpr::new();
        hand.add_measure(&Measure::sub(s(&[Y]), s(&[Z]), s(&[X])), &Rational::one());
        hand.add_measure(&Measure::sub(s(&[X]), s(&[Y, Z]), VarSet::EMPTY), &Rational::one());
        assert_eq!(hand, shearer());
    }

    #[test]
    fn single_monotonicity() {
        let mut a = LinExpr::new();
        a.add_term(s(&[X, Y]), &Rational::one());
        a.add_term(s(&[X]), &Rational::from_int(-1));
        let WitnessOutcome::Valid(w) = find_witness(&a, 2, Basis::Full).unwrap() else { panic!() };
        assert_eq!(w.expr(), a);
        assert!(w.s.is_empty());
    }

    #[test]
    fn invalid_inequality_yields_certificate() {
        let mut a = LinExpr::new();
        a.add_term(s(&[X]), &Rational::one());
        a.add_term(s(&[X, Y]), &Rational::from_int(-1));
        let WitnessOutcome::Invalid(h) = find_witness(&a, 2, Basis::Elemental).unwrap() else { panic!() };
        assert!(is_polymatroid(&h, Basis::Full));
        assert!(a.eval(&h).is_negative());
        // the modular function is one such certificate
        assert!(a.eval(&PolymatroidVector::modular(2)).is_negative());
    }

    #[test]
    fn universe_cap() {
        assert!(matches!(find_witness(&LinExpr::new(), 11, Basis::Elemental), Err(Error::UniverseTooLarge { .. })));
    }

    #[test]
    fn integralize_known_witness() {
        let lambda = [(s(&[X, Y, Z]), r(1, 2)), (s(&[Y, Z, W]), r(1, 2))];
        let w = [(Measure::card(s(&[X, Y])), r(1, 2)), (Measure::card(s(&[Y, Z])), r(1, 2)), (Measure::card(s(&[Z, W])), r(1, 2))];
        let wit =
            Witness { m: vec![], s: vec![(Measure::sub(s(&[X]), s(&[Z]), s(&[Y])), r(1, 2)), (Measure::sub(s(&[Y]), s(&[Z, W]), VarSet::EMPTY), r(1, 2))] };
        let q = integralize(&lambda, &w, &wit).unwrap();
        assert_eq!(q.canonical(), four_var_witness().canonical());
        assert!(verify_identity(&q));
        assert_eq!(count_unconditional(&q), 3);
    }

    #[test]
    fn integralize_scaling() {
        let q = integralize(&[(s(&[X]), Rational::one())], &[(Measure::card(s(&[X])), Rational::one())], &Witness::default()).unwrap();
        assert_eq!(q.z, vec![s(&[X])]);
        assert_eq!(q.d, vec![Measure::card(s(&[X]))]);
        let third = r(1, 3);
        let lambda = [(s(&[X]), third.clone()), (s(&[Y]), third.clone()), (s(&[Z]), third.clone())];
        let w = [(Measure::card(s(&[X])), third.clone()), (Measure::card(s(&[Y])), third.clone()), (Measure::card(s(&[Z])), third)];
        let q = integralize(&lambda, &w, &Witness::default()).unwrap();
        assert_eq!(q.z.len(), 3);
        assert_eq!(q.d.len(), 3);
        assert!(verify_identity(&q));
    }

    #[test]
    fn identity_checks() {
        assert!(verify_identity(&four_var_witness()));
        let mut broken = four_var_witness();
        broken.s.remove(0);
        assert!(!verify_identity(&broken));
        assert!(broken.residual().get(s(&[X, Y, Z])).is_positive() || broken.residual().get(s(&[X, Y, Z])).is_negative());
        assert!(verify_identity(&IntegralInequality::default()));
        assert_eq!(count_unconditional(&IntegralInequality::default()), 0);
    }

    #[test]
    fn shearer_integralized_counts() {
        let WitnessOutcome::Valid(wit) = find_witness(&shearer(), 3, Basis::Elemental).unwrap() else { panic!() };
        let lambda = [(s(&[X, Y, Z]), Rational::from_int(2))];
        let w: Vec<_> = [s(&[X, Y]), s(&[Y, Z]), s(&[X, Z])].iter().map(|p| (Measure::card(*p), Rational::one())).collect();
        let q = integralize(&lambda, &w, &wit).unwrap();
        assert!(verify_identity(&q));
        assert_eq!(q.z.len(), 2);
        assert_eq!(count_unconditional(&q), 3);
    }

    #[test]
    fn step_function_argument() {
        // evaluating any identity on the step function bounds |𝒵| by the unconditional count
        let q = four_var_witness();
        let h = PolymatroidVector::step(4);
        let lhs: Rational = q.z.iter().map(|z| h.get(*z).clone()).sum();
        let rhs: Rational = q.d.iter().map(|d| eval_measure(&h, d)).sum();
        assert!(lhs <= rhs);
    }
}
