//! The polymatroid bound and the max-min LP behind the width measures.

use super::measure::{basis_measures, Basis, Measure};
use super::witness::{check_lp_size, Witness};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpError, Rational, Relation, Sense};
use crate::query::{DisjunctiveRule, Schema, StatisticsProfile};
use crate::relation::Stat;
use crate::varset::VarSet;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;

/// Units in which the LP sees each constraint's log-statistic `n_δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogScale {
    /// Every bound equals this `N`; `n_δ = 1` stands for `log N`, so optima
    /// are exact multiples of `log N`.
    Common(Stat),
    /// Mixed bounds; `n_δ` is the exact value of the double nearest to
    /// `log₂ N_δ`. The optimal vertex is exact for these inputs.
    Bits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogStats {
    pub n: Vec<Rational>,
    pub scale: LogScale,
}

fn log2_approx(n: &Stat) -> Rational {
    if n <= &Stat::one() {
        return Rational::zero();
    }
    let bits = n.bits();
    // scale down so the conversion to f64 keeps full precision
    let shift = bits.saturating_sub(60);
    let top = (n >> shift).to_f64().expect("fits in f64");
    Rational::from_f64(top.log2() + shift as f64).expect("finite")
}

pub fn log_stats(profile: &StatisticsProfile) -> LogStats {
    if let Some(common) = profile.common_bound() {
        let unit = if common > &Stat::one() { Rational::one() } else { Rational::zero() };
        return LogStats { n: vec![unit; profile.constraints.len()], scale: LogScale::Common(common.clone()) };
    }
    LogStats { n: profile.constraints.iter().map(|c| log2_approx(&c.bound)).collect(), scale: LogScale::Bits }
}

/// Optimal solution of `max_h min_Z h(Z)` and its dual multipliers.
#[derive(Clone, Debug)]
pub struct MaxMinSolution {
    /// Optimum in the units of the supplied `n`.
    pub opt: Rational,
    /// One weight per target, summing to one.
    pub lambda: Vec<Rational>,
    /// One weight per statistics term.
    pub w: Vec<Rational>,
    /// Basic-measure multipliers making `Σ w h(δ) − Σ λ h(Z)` Shannon.
    pub witness: Witness,
}

/// `max t` subject to `t ≤ h(Z)` for every target, `h(δ) ≤ n_δ`, and `h` a
/// polymatroid over `{0, .., n_vars-1}`, solved in its dual form
/// `min Σ w n` over `(λ, w, y) ≥ 0` with `Σ λ = 1` and
/// `Σ w·δ − Σ λ·Z = Σ y·μ` coefficientwise.
pub fn solve_maxmin_with(n_vars: usize, targets: &[VarSet], deltas: &[Measure], n: &[Rational], basis: Basis) -> Result<MaxMinSolution> {
    check_lp_size(n_vars)?;
    assert_eq!(deltas.len(), n.len());
    if targets.is_empty() {
        return Err(Error::PreconditionViolated("no targets".into()));
    }
    let universe = VarSet::full(n_vars);
    if targets.iter().any(|t| !t.is_subset(universe)) || deltas.iter().any(|d| !d.vars().is_subset(universe)) {
        return Err(Error::PreconditionViolated("term outside the universe".into()));
    }
    let measures = basis_measures(n_vars, basis);
    let k = targets.len();
    let dn = deltas.len();
    let nv = k + dn + measures.len();
    let rows = (1usize << n_vars) - 1;
    let mut coeffs: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); rows];
    let neg = Rational::from_int(-1);
    for (i, t) in targets.iter().enumerate() {
        if !t.is_empty() {
            coeffs[t.bits() as usize - 1].push((i, neg.clone()));
        }
    }
    for (j, d) in deltas.iter().enumerate() {
        for (s, c) in d.expr().iter() {
            coeffs[s.bits() as usize - 1].push((k + j, c.clone()));
        }
    }
    for (j, mu) in measures.iter().enumerate() {
        for (s, c) in mu.expr().iter() {
            coeffs[s.bits() as usize - 1].push((k + dn + j, -c));
        }
    }
    let mut lp = LinearProgram::new(nv, Sense::Minimize);
    for (j, nd) in n.iter().enumerate() {
        lp.set_objective(k + j, nd.clone());
    }
    for row in coeffs {
        lp.add(row, Relation::Eq, Rational::zero());
    }
    lp.add((0..k).map(|i| (i, Rational::one())).collect(), Relation::Eq, Rational::one());
    let sol = match solve_lp(&lp) {
        Ok(s) => s,
        Err(LpError::Infeasible { .. }) => return Err(Error::Unbounded),
        Err(LpError::Unbounded) => unreachable!("objective is bounded below by zero"),
    };
    let lambda = sol.x[..k].to_vec();
    let w = sol.x[k..k + dn].to_vec();
    let mut witness = Witness::default();
    for (mu, y) in measures.into_iter().zip(sol.x[k + dn..].iter()) {
        if y.is_zero() {
            continue;
        }
        if mu.is_mon() {
            witness.m.push((mu, y.clone()));
        } else {
            witness.s.push((mu, y.clone()));
        }
    }
    Ok(MaxMinSolution { opt: sol.objective, lambda, w, witness })
}

pub fn constraint_measures(profile: &StatisticsProfile) -> Vec<Measure> {
    profile.constraints.iter().map(|c| Measure::mon(c.y, c.x)).collect()
}

/// Max-min LP over the constraints of `profile`, with `n` taken from
/// [`log_stats`].
pub fn solve_maxmin_dual(n_vars: usize, targets: &[VarSet], profile: &StatisticsProfile, basis: Basis) -> Result<MaxMinSolution> {
    let stats = log_stats(profile);
    solve_maxmin_with(n_vars, targets, &constraint_measures(profile), &stats.n, basis)
}

/// `Σ w_δ · log N_δ` over the constraints of a profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundExpr {
    pub w: Vec<Rational>,
}

/// `∏ N_δ^{w_δ}` either as an exact integer or as a root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundValue {
    Exact(BigUint),
    /// `radicand^(1/index)`.
    Root {
        radicand: BigUint,
        index: u64,
    },
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Exact(v) => write!(f, "{v}"),
            BoundValue::Root { radicand, index } => write!(f, "{radicand}^(1/{index})"),
        }
    }
}

impl BoundExpr {
    /// `Σ w n` in the units of `stats`.
    pub fn exponent(&self, stats: &LogStats) -> Rational {
        self.w.iter().zip(&stats.n).map(|(w, n)| w * n).sum()
    }

    /// `Σ w` when every bound is the same `N`: the exponent of `N`.
    pub fn common_exponent(&self, profile: &StatisticsProfile) -> Option<Rational> {
        profile.common_bound().map(|_| self.w.iter().sum())
    }

    pub fn symbolic(&self, profile: &StatisticsProfile, schema: &Schema, names: &[String]) -> String {
        let terms: Vec<String> = self
            .w
            .iter()
            .zip(&profile.constraints)
            .filter(|(w, _)| !w.is_zero())
            .map(|(w, c)| {
                let l = c.label(schema, names);
                let l = if l.starts_with('|') { format!("log{l}") } else { format!("log deg {l}") };
                if w == &Rational::one() {
                    l
                } else {
                    format!("{w}*{l}")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    pub fn value(&self, profile: &StatisticsProfile) -> BoundValue {
        let l = Rational::lcm_denominators(&self.w).to_u64().expect("denominator fits in u64");
        let lr = Rational::from_int(l as i64);
        let mut p = BigUint::one();
        for (w, c) in self.w.iter().zip(&profile.constraints) {
            if w.is_zero() {
                continue;
            }
            let e = (w * &lr).numer().to_u32().expect("exponent fits in u32");
            p *= c.bound.pow(e);
        }
        if l == 1 {
            return BoundValue::Exact(p);
        }
        if p.is_zero() {
            return BoundValue::Exact(p);
        }
        let idx = u32::try_from(l).expect("root index fits in u32");
        let r = p.nth_root(idx);
        if r.pow(idx) == p {
            BoundValue::Exact(r)
        } else {
            BoundValue::Root { radicand: p, index: l }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PolymatroidBound {
    /// Weight per output atom.
    pub lambda: Vec<(VarSet, Rational)>,
    pub expr: BoundExpr,
    /// Optimum in the units of [`log_stats`].
    pub exponent: Rational,
    pub stats: LogStats,
    pub witness: Witness,
}

/// Best `Σ w_δ n_δ` such that `Σ λ_Z h(Z) ≤ Σ w_δ h(δ)` is Shannon, where
/// `Z` ranges over the output atoms of `rule`.
pub fn solve_polymatroid_bound(rule: &DisjunctiveRule, profile: &StatisticsProfile, basis: Basis) -> Result<PolymatroidBound> {
    let targets: Vec<VarSet> = rule.output.atoms().iter().map(|a| a.vars).collect();
    let stats = log_stats(profile);
    let sol = solve_maxmin_with(rule.names.len(), &targets, &constraint_measures(profile), &stats.n, basis)?;
    Ok(PolymatroidBound { lambda: targets.into_iter().zip(sol.lambda).collect(), expr: BoundExpr { w: sol.w }, exponent: sol.opt, stats, witness: sol.witness })
}
