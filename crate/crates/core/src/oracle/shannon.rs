//! LPs written directly over the polymatroid cone, one column per `h(S)`.

use crate::entropy::LinExpr;
use crate::error::{Error, Result};
use crate::lp::{solve_lp_exact, LinearProgram, LpError, Rational, Relation, Sense};
use crate::varset::VarSet;

pub const ORACLE_MAX_VARS: usize = 6;

fn col(s: VarSet) -> usize {
    s.bits() as usize - 1
}

fn check(n: usize) -> Result<()> {
    if n > ORACLE_MAX_VARS {
        return Err(Error::UniverseTooLarge { vars: n, limit: ORACLE_MAX_VARS });
    }
    Ok(())
}

/// Which inequalities describe the cone in [`maxmin_primal`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    /// Every submodularity and monotonicity inequality. Far too many rows
    /// for six variables with the dense exact simplex.
    Full,
    /// `h(iK) + h(jK) ≥ h(ijK) + h(K)` for `i < j` outside `K`, and
    /// `h(V) ≥ h(V − i)`.
    Elemental,
}

/// Adds `h(S) + h(T) ≥ h(S∪T) + h(S∩T)` for every incomparable pair and
/// `h(S) ≤ h(S ∪ {i})` for every `S` and `i ∉ S`. `h(∅)` is the constant 0.
fn add_cone(lp: &mut LinearProgram, n: usize) {
    let full = (1u32 << n) - 1;
    let one = Rational::one;
    let push = |v: &mut Vec<(usize, Rational)>, s: u32, c: Rational| {
        if s != 0 {
            v.push((s as usize - 1, c));
        }
    };
    for a in 0..=full {
        for b in a + 1..=full {
            if a & b == a || a & b == b {
                continue;
            }
            let mut row = Vec::new();
            push(&mut row, a, one());
            push(&mut row, b, one());
            push(&mut row, a | b, -one());
            push(&mut row, a & b, -one());
            lp.add(row, Relation::Ge, Rational::zero());
        }
        for i in 0..n {
            if a & (1 << i) == 0 {
                let mut row = Vec::new();
                push(&mut row, a | (1 << i), one());
                push(&mut row, a, -one());
                lp.add(row, Relation::Ge, Rational::zero());
            }
        }
    }
}

fn add_elemental(lp: &mut LinearProgram, n: usize) {
    let full = (1u32 << n) - 1;
    let one = Rational::one;
    let term = |s: u32, c: Rational| (s != 0).then(|| (s as usize - 1, c));
    for i in 0..n {
        for j in i + 1..n {
            let ij = (1u32 << i) | (1 << j);
            for k in 0..=full {
                if k & ij != 0 {
                    continue;
                }
                let row = [term(k | 1 << i, one()), term(k | 1 << j, one()), term(k | ij, -one()), term(k, -one())];
                lp.add(row.into_iter().flatten().collect(), Relation::Ge, Rational::zero());
            }
        }
        let rest = full & !(1 << i);
        let row = [term(full, one()), term(rest, -one())];
        lp.add(row.into_iter().flatten().collect(), Relation::Ge, Rational::zero());
    }
}

/// Minimizes `Σ a_S h(S)` over polymatroids with `h(V) ≤ 1`; the cone is
/// closed under scaling, so the inequality `Σ a_S h(S) ≥ 0` is valid iff
/// the minimum is 0.
pub fn check_shannon_direct(expr: &LinExpr, n: usize) -> Result<bool> {
    check(n)?;
    if !expr.vars().is_subset(VarSet::full(n)) {
        return Err(Error::PreconditionViolated("expression mentions variables outside the universe".into()));
    }
    if n == 0 {
        return Ok(true);
    }
    let mut lp = LinearProgram::new((1 << n) - 1, Sense::Minimize);
    for (s, c) in expr.iter() {
        if !s.is_empty() {
            lp.set_objective(col(s), c.clone());
        }
    }
    add_cone(&mut lp, n);
    lp.add(vec![(col(VarSet::full(n)), Rational::one())], Relation::Le, Rational::one());
    let sol = solve_lp_exact(&lp).map_err(Error::from)?;
    Ok(!sol.objective.is_negative())
}

/// `max { t : t ≤ h(Z) for every target Z, h(Y∪X) − h(X) ≤ n for every
/// (Y, X, n), h a polymatroid }`, or `None` when unbounded.
pub fn maxmin_primal(n: usize, targets: &[VarSet], constraints: &[(VarSet, VarSet, Rational)], cone: Cone) -> Result<Option<Rational>> {
    check(n)?;
    let cols = (1usize << n) - 1;
    let t = cols;
    let mut lp = LinearProgram::new(cols + 1, Sense::Maximize);
    lp.set_objective(t, Rational::one());
    match cone {
        Cone::Full => add_cone(&mut lp, n),
        Cone::Elemental => add_elemental(&mut lp, n),
    }
    for &z in targets {
        if z.is_empty() {
            return Ok(Some(Rational::zero()));
        }
        lp.add(vec![(t, Rational::one()), (col(z), -Rational::one())], Relation::Le, Rational::zero());
    }
    for (y, x, b) in constraints {
        let mut row = vec![(col(y.union(*x)), Rational::one())];
        if !x.is_empty() {
            row.push((col(*x), -Rational::one()));
        }
        lp.add(row, Relation::Le, b.clone());
    }
    match solve_lp_exact(&lp) {
        Ok(sol) => Ok(Some(sol.objective)),
        Err(LpError::Unbounded) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> VarSet {
        VarSet::from_vars(v.iter().copied())
    }

    fn e(terms: &[(&[usize], i64, i64)]) -> LinExpr {
        let mut x = LinExpr::new();
        for (v, p, q) in terms {
            x.add_term(s(v), &Rational::new(*p, *q));
        }
        x
    }

    #[test]
    fn shearer_triangle() {
        let x = e(&[(&[0, 1], 1, 1), (&[1, 2], 1, 1), (&[0, 2], 1, 1), (&[0, 1, 2], -2, 1)]);
        assert!(check_shannon_direct(&x, 3).unwrap());
    }

    #[test]
    fn monotonicity_backwards_fails() {
        assert!(!check_shannon_direct(&e(&[(&[0], 1, 1), (&[0, 1], -1, 1)]), 2).unwrap());
    }

    #[test]
    fn two_headed_inequality() {
        // h(XY)+h(YZ)+h(ZW) ≥ ½h(XYZ) + ½h(YZW) scaled by 2
        let x = e(&[(&[0, 1], 2, 1), (&[1, 2], 2, 1), (&[2, 3], 2, 1), (&[0, 1, 2], -1, 1), (&[1, 2, 3], -1, 1)]);
        assert!(check_shannon_direct(&x, 4).unwrap());
        // h(XY)+h(YZ) ≥ h(XYZ)+h(YZW) fails when only W carries entropy
        let y = e(&[(&[0, 1], 1, 1), (&[1, 2], 1, 1), (&[0, 1, 2], -1, 1), (&[1, 2, 3], -1, 1)]);
        assert!(!check_shannon_direct(&y, 4).unwrap());
    }

    #[test]
    fn too_many_variables() {
        assert!(matches!(check_shannon_direct(&LinExpr::new(), 7), Err(Error::UniverseTooLarge { .. })));
    }

    #[test]
    fn triangle_maxmin() {
        let one = Rational::one();
        let c = vec![(s(&[0, 1]), VarSet::EMPTY, one.clone()), (s(&[1, 2]), VarSet::EMPTY, one.clone()), (s(&[0, 2]), VarSet::EMPTY, one)];
        for cone in [Cone::Full, Cone::Elemental] {
            assert_eq!(maxmin_primal(3, &[s(&[0, 1, 2])], &c, cone).unwrap(), Some(Rational::new(3, 2)));
            assert_eq!(maxmin_primal(3, &[s(&[0, 1, 2])], &c[..1], cone).unwrap(), None);
        }
    }

    #[test]
    fn cones_agree_on_a_four_cycle() {
        let one = Rational::one();
        let c: Vec<_> = (0..4).map(|i| (s(&[i, (i + 1) % 4]), VarSet::EMPTY, one.clone())).collect();
        let targets = [s(&[0, 1, 2]), s(&[1, 2, 3])];
        let full = maxmin_primal(4, &targets, &c, Cone::Full).unwrap();
        assert_eq!(full, maxmin_primal(4, &targets, &c, Cone::Elemental).unwrap());
        assert_eq!(full, Some(Rational::new(3, 2)));
    }
}
