//! Removing an unconditional statistics term from an integral inequality at
//! the cost of at most one output term.

use super::measure::Measure;
use super::witness::{verify_identity, IntegralInequality};
use crate::error::{Error, Result};
use crate::varset::VarSet;

/// Result of [`reset_tracked`]: the new inequality plus, for each surviving
/// statistics term, its index in the input's `d`.
#[derive(Clone, Debug)]
pub struct ResetOutcome {
    pub ineq: IntegralInequality,
    pub kept: Vec<usize>,
}

/// Drops the first statistics term equal to `drop`.
pub fn reset(ineq: &IntegralInequality, drop: &Measure) -> Result<IntegralInequality> {
    let idx = ineq.d.iter().position(|d| d == drop).ok_or_else(|| Error::PreconditionViolated("term to drop is not a statistics term".into()))?;
    Ok(reset_tracked(ineq, idx)?.ineq)
}

fn smallest<T: Ord + Copy>(items: &[T], pred: impl Fn(&T) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, it) in items.iter().enumerate() {
        if pred(it) && best.is_none_or(|b| *it < items[b]) {
            best = Some(i);
        }
    }
    best
}

/// Drops `ineq.d[drop]`, which must be unconditional.
///
/// The dropped `h(W)` becomes a pending target. Each round cancels the target
/// against an output term (done), a statistics term `(Y|W)` (target grows to
/// `WY`), a monotonicity term `(Y|X)` with `XY = W` (target shrinks to `X`)
/// or a submodularity term `(Y;Z|X)` with `XY = W` (trade it for `(Z|X)`,
/// target grows to `XYZ`). Every round lowers the potential.
pub fn reset_tracked(ineq: &IntegralInequality, drop: usize) -> Result<ResetOutcome> {
    if !verify_identity(ineq) {
        return Err(Error::PreconditionViolated("input is not an identity".into()));
    }
    let Some(Measure::Mon { y: w, x }) = ineq.d.get(drop).copied() else {
        return Err(Error::PreconditionViolated("no statistics term at that index".into()));
    };
    if !x.is_empty() {
        return Err(Error::PreconditionViolated("only unconditional terms can be dropped".into()));
    }
    let mut z = ineq.z.clone();
    let mut d: Vec<(Measure, usize)> = ineq.d.iter().copied().enumerate().map(|(i, m)| (m, i)).collect();
    d.remove(drop);
    let mut m = ineq.m.clone();
    let mut s = ineq.s.clone();
    let mut target = w;
    loop {
        if target.is_empty() {
            break;
        }
        if let Some(i) = smallest(&z, |zz| *zz == target) {
            z.remove(i);
            break;
        }
        let dm: Vec<Measure> = d.iter().map(|p| p.0).collect();
        if let Some(i) = smallest(&dm, |t| matches!(t, Measure::Mon { x, .. } if *x == target)) {
            let Measure::Mon { y, .. } = d.remove(i).0 else { unreachable!() };
            target = target.union(y);
            continue;
        }
        if let Some(i) = smallest(&m, |t| matches!(t, Measure::Mon { y, x } if y.union(*x) == target)) {
            let Measure::Mon { x, .. } = m.remove(i) else { unreachable!() };
            target = x;
            continue;
        }
        if let Some(i) = smallest(&s, |t| matches!(t, Measure::Sub { y, z, x } if x.union(*y) == target || x.union(*z) == target)) {
            let Measure::Sub { y, z: zz, x } = s.remove(i) else { unreachable!() };
            let other = if x.union(y) == target { zz } else { y };
            m.push(Measure::mon(other, x));
            target = x.union(y).union(zz);
            continue;
        }
        return Err(Error::PreconditionViolated(format!("no term cancels h({target:?})")));
    }
    let kept = d.iter().map(|p| p.1).collect();
    let out = IntegralInequality::new(z, d.into_iter().map(|p| p.0).collect(), m, s);
    debug_assert!(verify_identity(&out));
    Ok(ResetOutcome { ineq: out, kept })
}

/// Variables of all terms, for callers that need the universe.
pub fn ineq_vars(q: &IntegralInequality) -> VarSet {
    q.z.iter().fold(VarSet::EMPTY, |a, z| a.union(*z)).union(q.d.iter().chain(&q.m).chain(&q.s).fold(VarSet::EMPTY, |a, t| a.union(t.vars())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: usize = 0;
    const Y: usize = 1;
    const Z: usize = 2;
    const W: usize = 3;

    fn s(v: &[usize]) -> VarSet {
        VarSet::from_vars(v.iter().copied())
    }

    #[test]
    fn triangle_drop_one_edge() {
        // 2h(XYZ) ≤ h(XY)+h(YZ)+h(XZ) with 𝒮 = {(Y;Z|X), (X;YZ|∅)}
        let q = IntegralInequality::new(
            vec![s(&[X, Y, Z]), s(&[X, Y, Z])],
            vec![Measure::card(s(&[X, Y])), Measure::card(s(&[Y, Z])), Measure::card(s(&[X, Z]))],
            vec![],
            vec![Measure::sub(s(&[Y]), s(&[Z]), s(&[X])), Measure::sub(s(&[X]), s(&[Y, Z]), VarSet::EMPTY)],
        );
        assert!(verify_identity(&q));
        let out = reset(&q, &Measure::card(s(&[X, Z]))).unwrap();
        assert_eq!(out.z, vec![s(&[X, Y, Z])]);
        assert_eq!(out.d, vec![Measure::card(s(&[X, Y])), Measure::card(s(&[Y, Z]))]);
        assert_eq!(out.m, vec![Measure::mon(s(&[Y]), s(&[X]))]);
        assert_eq!(out.s, vec![Measure::sub(s(&[X]), s(&[Y, Z]), VarSet::EMPTY)]);
    }

    #[test]
    fn second_example_collapses_to_monotonicity() {
        // h(XYZW)+h(Y) + h(X;Z|Y) = h(XY)+h(YZ)+h(W|XYZ)
        let q = IntegralInequality::new(
            vec![s(&[X, Y, Z, W]), s(&[Y])],
            vec![Measure::card(s(&[X, Y])), Measure::card(s(&[Y, Z])), Measure::mon(s(&[W]), s(&[X, Y, Z]))],
            vec![],
            vec![Measure::sub(s(&[X]), s(&[Z]), s(&[Y]))],
        );
        assert!(verify_identity(&q));
        let out = reset(&q, &Measure::card(s(&[X, Y]))).unwrap();
        assert_eq!(out.z, vec![s(&[Y])]);
        assert_eq!(out.d, vec![Measure::card(s(&[Y, Z]))]);
        assert_eq!(out.m, vec![Measure::mon(s(&[Z]), s(&[Y]))]);
        assert!(out.s.is_empty());
    }

    #[test]
    fn direct_cancellation() {
        let q = IntegralInequality::new(vec![s(&[W]), s(&[X])], vec![Measure::card(s(&[W])), Measure::card(s(&[X]))], vec![], vec![]);
        let out = reset_tracked(&q, 0).unwrap();
        assert_eq!(out.ineq.z, vec![s(&[X])]);
        assert_eq!(out.ineq.d, vec![Measure::card(s(&[X]))]);
        assert_eq!(out.kept, vec![1]);
    }

    #[test]
    fn rejects_bad_input() {
        let q =
            IntegralInequality::new(vec![s(&[X])], vec![Measure::mon(s(&[X]), s(&[Y])), Measure::card(s(&[Y]))], vec![Measure::mon(s(&[Y]), s(&[X]))], vec![]);
        assert!(verify_identity(&q));
        assert!(reset_tracked(&q, 0).is_err());
        let broken = IntegralInequality::new(vec![s(&[X])], vec![Measure::card(s(&[Y]))], vec![], vec![]);
        assert!(reset_tracked(&broken, 0).is_err());
    }

    #[test]
    fn monotonicity_to_empty_target() {
        // h(Y) + h(X|∅) = h(X) + h(Y)
        let q = IntegralInequality::new(vec![s(&[Y])], vec![Measure::card(s(&[X])), Measure::card(s(&[Y]))], vec![Measure::card(s(&[X]))], vec![]);
        assert!(verify_identity(&q));
        let out = reset_tracked(&q, 0).unwrap();
        assert_eq!(out.ineq.z, vec![s(&[Y])]);
        assert!(out.ineq.m.is_empty());
        assert_eq!(out.kept, vec![1]);
    }
}
