use crate::lp::Rational;
use crate::varset::VarSet;
use std::collections::BTreeMap;
use std::fmt;

/// A basic information measure: `(Y|X)` or `(Y;Z|X)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Measure {
    Mon {
        y: VarSet,
        x: VarSet,
    },
    /// Stored with `y < z` so equal measures compare equal.
    Sub {
        y: VarSet,
        z: VarSet,
        x: VarSet,
    },
}

impl Measure {
    pub fn mon(y: VarSet, x: VarSet) -> Measure {
        assert!(!y.is_empty(), "empty monotonicity measure");
        assert!(y.is_disjoint(x));
        Measure::Mon { y, x }
    }

    /// `(Y|∅)`.
    pub fn card(y: VarSet) -> Measure {
        Measure::mon(y, VarSet::EMPTY)
    }

    pub fn sub(y: VarSet, z: VarSet, x: VarSet) -> Measure {
        assert!(!y.is_empty() && !z.is_empty(), "empty submodularity side");
        assert!(y.is_disjoint(z) && y.is_disjoint(x) && z.is_disjoint(x));
        if y <= z {
            Measure::Sub { y, z, x }
        } else {
            Measure::Sub { y: z, z: y, x }
        }
    }

    pub fn is_mon(&self) -> bool {
        matches!(self, Measure::Mon { .. })
    }

    pub fn is_unconditional(&self) -> bool {
        matches!(self, Measure::Mon { x, .. } if x.is_empty())
    }

    pub fn vars(&self) -> VarSet {
        match *self {
            Measure::Mon { y, x } => y.union(x),
            Measure::Sub { y, z, x } => y.union(z).union(x),
        }
    }

    pub fn x(&self) -> VarSet {
        match *self {
            Measure::Mon { x, .. } | Measure::Sub { x, .. } => x,
        }
    }

    /// The measure as a combination of `h(·)` terms.
    pub fn expr(&self) -> LinExpr {
        let mut e = LinExpr::new();
        let one = Rational::one();
        let neg = Rational::from_int(-1);
        match *self {
            Measure::Mon { y, x } => {
                e.add_term(y.union(x), &one);
                e.add_term(x, &neg);
            }
            Measure::Sub { y, z, x } => {
                e.add_term(x.union(y), &one);
                e.add_term(x.union(z), &one);
                e.add_term(x, &neg);
                e.add_term(x.union(y).union(z), &neg);
            }
        }
        e
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> MeasureDisplay<'a> {
        MeasureDisplay { m: self, names }
    }
}

pub struct MeasureDisplay<'a> {
    m: &'a Measure,
    names: &'a [String],
}

fn set(s: VarSet, names: &[String]) -> String {
    if s.is_empty() {
        "∅".to_string()
    } else {
        s.display(names).to_string()
    }
}

impl fmt::Display for MeasureDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self.m {
            Measure::Mon { y, x } => write!(f, "({}|{})", set(y, self.names), set(x, self.names)),
            Measure::Sub { y, z, x } => write!(f, "({};{}|{})", set(y, self.names), set(z, self.names), set(x, self.names)),
        }
    }
}

/// `Σ a_X h(X)` with sparse rational coefficients; `h(∅)` terms are dropped.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct LinExpr {
    coeffs: BTreeMap<VarSet, Rational>,
}

impl LinExpr {
    pub fn new() -> LinExpr {
        LinExpr::default()
    }

    pub fn term(s: VarSet, c: Rational) -> LinExpr {
        let mut e = LinExpr::new();
        e.add_term(s, &c);
        e
    }

    pub fn add_term(&mut self, s: VarSet, c: &Rational) {
        if s.is_empty() || c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(s).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&s);
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, c: &Rational) {
        for (s, a) in &other.coeffs {
            self.add_term(*s, &(a * c));
        }
    }

    pub fn add_measure(&mut self, m: &Measure, c: &Rational) {
        self.add_scaled(&m.expr(), c);
    }

    pub fn get(&self, s: VarSet) -> Rational {
        self.coeffs.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarSet, &Rational)> {
        self.coeffs.iter().map(|(s, c)| (*s, c))
    }

    pub fn vars(&self) -> VarSet {
        self.coeffs.keys().fold(VarSet::EMPTY, |a, s| a.union(*s))
    }

    pub fn eval(&self, h: &PolymatroidVector) -> Rational {
        self.coeffs.iter().map(|(s, c)| c * h.get(*s)).sum()
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> LinExprDisplay<'a> {
        LinExprDisplay { e: self, names }
    }
}

pub struct LinExprDisplay<'a> {
    e: &'a LinExpr,
    names: &'a [String],
}

impl fmt::Display for LinExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e.is_zero() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.e.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mag != Rational::one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "h({})", s.display(self.names))?;
        }
        Ok(())
    }
}

/// A set function on the subsets of `{0, .., n-1}`, indexed by bitmask.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolymatroidVector {
    n: usize,
    h: Vec<Rational>,
}

impl PolymatroidVector {
    pub fn zeros(n: usize) -> PolymatroidVector {
        PolymatroidVector { n, h: vec![Rational::zero(); 1 << n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(VarSet) -> Rational) -> PolymatroidVector {
        PolymatroidVector { n, h: (0..1u32 << n).map(|b| f(VarSet::from_bits(b))).collect() }
    }

    /// `h(W) = |W|`.
    pub fn modular(n: usize) -> PolymatroidVector {
        PolymatroidVector::from_fn(n, |s| Rational::from(s.len()))
    }

    /// `h(W) = 1` for nonempty `W`.
    pub fn step(n: usize) -> PolymatroidVector {
        PolymatroidVector::from_fn(n, |s| if s.is_empty() { Rational::zero() } else { Rational::one() })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: VarSet) -> &Rational {
        &self.h[s.bits() as usize]
    }

    pub fn set(&mut self, s: VarSet, v: Rational) {
        self.h[s.bits() as usize] = v;
    }

    pub fn universe(&self) -> VarSet {
        VarSet::full(self.n)
    }
}

pub fn eval_measure(h: &PolymatroidVector, m: &Measure) -> Rational {
    match *m {
        Measure::Mon { y, x } => h.get(y.union(x)) - h.get(x),
        Measure::Sub { y, z, x } => {
            let xy = h.get(x.union(y));
            let xz = h.get(x.union(z));
            let xyz = h.get(x.union(y).union(z));
            &(xy + xz) - &(h.get(x) + xyz)
        }
    }
}

/// Which basic measures generate the Shannon cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Basis {
    /// `(A;B|X)` for singletons `A ≠ B`, plus `(A|V−A)`.
    #[default]
    Elemental,
    /// Every monotonicity and submodularity measure.
    Full,
}

impl std::str::FromStr for Basis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "elemental" => Ok(Basis::Elemental),
            "full" => Ok(Basis::Full),
            other => Err(format!("unknown basis `{other}` (expected elemental or full)")),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Elemental => "elemental",
            Basis::Full => "full",
        })
    }
}

/// The measures of `basis` over the universe `{0, .., n-1}`.
pub fn basis_measures(n: usize, basis: Basis) -> Vec<Measure> {
    let v = VarSet::full(n);
    let mut out = Vec::new();
    match basis {
        Basis::Elemental => {
            for a in 0..n {
                for b in a + 1..n {
                    let pair = VarSet::from_vars([a, b]);
                    for x in v.minus(pair).subsets() {
                        out.push(Measure::sub(VarSet::singleton(a), VarSet::singleton(b), x));
                    }
                }
            }
            for a in 0..n {
                let s = VarSet::singleton(a);
                out.push(Measure::mon(s, v.minus(s)));
            }
        }
        Basis::Full => {
            for x in v.subsets() {
                let rest = v.minus(x);
                for y in rest.subsets().filter(|y| !y.is_empty()) {
                    out.push(Measure::mon(y, x));
                }
                for y in rest.subsets().filter(|y| !y.is_empty()) {
                    for z in rest.minus(y).subsets().filter(|z| !z.is_empty() && y < *z) {
                        out.push(Measure::sub(y, z, x));
                    }
                }
            }
        }
    }
    out
}

pub fn is_polymatroid(h: &PolymatroidVector, basis: Basis) -> bool {
    h.get(VarSet::EMPTY).is_zero() && basis_measures(h.num_vars(), basis).iter().all(|m| !eval_measure(h, m).is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: usize = 0;
    const B: usize = 1;

    fn s(v: &[usize]) -> VarSet {
        VarSet::from_vars(v.iter().copied())
    }

    #[test]
    fn evaluations() {
        // h(W) = |W ∩ {A,B}| over three variables
        let h = PolymatroidVector::from_fn(3, |w| Rational::from(w.intersect(s(&[A, B])).len()));
        assert_eq!(eval_measure(&h, &Measure::mon(s(&[A]), s(&[B]))), Rational::one());
        let m = PolymatroidVector::modular(3);
        assert!(eval_measure(&m, &Measure::sub(s(&[0]), s(&[1]), s(&[2]))).is_zero());
        assert_eq!(eval_measure(&m, &Measure::card(s(&[0, 2]))), Rational::from_int(2));
    }

    #[test]
    fn polymatroid_examples() {
        assert!(is_polymatroid(&PolymatroidVector::step(4), Basis::Elemental));
        assert!(is_polymatroid(&PolymatroidVector::modular(4), Basis::Full));
        let mut bad = PolymatroidVector::modular(2);
        bad.set(s(&[0, 1]), Rational::zero());
        assert!(!is_polymatroid(&bad, Basis::Elemental));
        assert!(!is_polymatroid(&bad, Basis::Full));
    }

    #[test]
    fn elemental_count() {
        for m in 1..=6usize {
            let expected = m * (m - 1) * (1 << m) / 8 + m;
            assert_eq!(basis_measures(m, Basis::Elemental).len(), expected);
        }
    }

    #[test]
    fn sub_is_canonical_and_expr_cancels() {
        let a = Measure::sub(s(&[2]), s(&[0]), s(&[1]));
        let b = Measure::sub(s(&[0]), s(&[2]), s(&[1]));
        assert_eq!(a, b);
        let mut e = Measure::mon(s(&[0]), s(&[1])).expr();
        e.add_measure(&Measure::card(s(&[1])), &Rational::one());
        assert_eq!(e, LinExpr::term(s(&[0, 1]), Rational::one()));
    }

    fn arb_vector(n: usize) -> impl Strategy<Value = PolymatroidVector> {
        prop::collection::vec(0i64..6, 1 << n).prop_map(move |v| {
            let mut h = PolymatroidVector::from_fn(n, |w| Rational::from_int(v[w.bits() as usize]));
            h.set(VarSet::EMPTY, Rational::zero());
            h
        })
    }

    fn arb_polymatroid(n: usize) -> impl Strategy<Value = PolymatroidVector> {
        // non-negative combinations of rank functions of coverage functions
        prop::collection::vec(prop::collection::vec(0u32..(1 << n), 1..4), 1..4).prop_map(move |families| {
            PolymatroidVector::from_fn(n, |w| {
                families
                    .iter()
                    .map(|fam| {
                        let covered = w.iter().fold(0u32, |acc, v| acc | fam.get(v % fam.len()).copied().unwrap_or(0));
                        Rational::from_int(covered.count_ones() as i64)
                    })
                    .sum()
            })
        })
    }

    proptest! {
        #[test]
        fn elemental_agrees_with_full(h in (1usize..=4).prop_flat_map(arb_vector)) {
            prop_assert_eq!(is_polymatroid(&h, Basis::Elemental), is_polymatroid(&h, Basis::Full));
        }

        #[test]
        fn elemental_agrees_with_full_on_polymatroids(h in (1usize..=5).prop_flat_map(arb_polymatroid)) {
            prop_assert!(is_polymatroid(&h, Basis::Full));
            prop_assert!(is_polymatroid(&h, Basis::Elemental));
        }
    }
}
