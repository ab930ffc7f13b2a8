//! Float-guided exact solving: a floating-point simplex proposes an optimal
//! basis, which is then certified in exact arithmetic by solving for the
//! basic primal values and the row duals and checking every sign condition.
//! Anything the certificate cannot confirm, including infeasible and
//! unbounded programs, is re-solved by [`solve_lp_exact`].

use super::simplex::{solve_lp_exact, LinearProgram, LpError, LpSolution, Relation, Sense};
use super::Rational;

const EPS: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 64;

/// Rows with non-negative right-hand side, columns laid out as
/// structural | slack or surplus | artificial.
struct Standard {
    m: usize,
    ncols: usize,
    sign: Vec<i64>,
    is_art: Vec<bool>,
    /// Sparse columns over the normalized rows.
    cols: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
    /// Phase-two objective, maximized.
    cost: Vec<Rational>,
    start: Vec<usize>,
}

fn standardize(lp: &LinearProgram) -> Standard {
    let n = lp.num_vars;
    let m = lp.constraints.len();
    let mut sign = vec![1i64; m];
    let mut rel = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut r = c.rel;
        if c.rhs.is_negative() {
            sign[i] = -1;
            r = match r {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rel.push(r);
    }
    let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    let mut rhs = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let s = Rational::from_int(sign[i]);
        let mut row: Vec<(usize, Rational)> = Vec::new();
        for (v, a) in &c.coeffs {
            match row.iter_mut().find(|(u, _)| u == v) {
                Some((_, acc)) => *acc += &(a * &s),
                None => row.push((*v, a * &s)),
            }
        }
        for (v, a) in row {
            if !a.is_zero() {
                cols[v].push((i, a));
            }
        }
        rhs.push(&c.rhs * &s);
    }
    let mut start = vec![usize::MAX; m];
    for i in 0..m {
        match rel[i] {
            Relation::Le => {
                start[i] = cols.len();
                cols.push(vec![(i, Rational::one())]);
            }
            Relation::Ge => cols.push(vec![(i, Rational::from_int(-1))]),
            Relation::Eq => {}
        }
    }
    let mut is_art = vec![false; cols.len()];
    for i in 0..m {
        if rel[i] != Relation::Le {
            start[i] = cols.len();
            cols.push(vec![(i, Rational::one())]);
            is_art.push(true);
        }
    }
    let ncols = cols.len();
    let flip = lp.sense == Sense::Minimize;
    let cost = (0..ncols)
        .map(|j| match lp.objective.get(j) {
            Some(c) if flip => -c,
            Some(c) => c.clone(),
            None => Rational::zero(),
        })
        .collect();
    Standard { m, ncols, sign, is_art, cols, rhs, cost, start }
}

struct FloatTableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    barred: Vec<bool>,
    budget: usize,
}

impl FloatTableau {
    fn set_objective(&mut self, c: &[f64]) {
        let w = self.ncols + 1;
        let mut obj: Vec<f64> = (0..w).map(|j| if j < self.ncols { -c[j] } else { 0.0 }).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    obj[j] += cb * row[j];
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.ncols + 1;
        let inv = 1.0 / self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..w).filter(|&j| prow[j] != 0.0).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c] == 0.0 {
                continue;
            }
            let f = row[c];
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[c] = 0.0;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for &j in &nz {
                self.obj[j] -= f * prow[j];
            }
            self.obj[c] = 0.0;
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// `false` on unboundedness or when the pivot budget runs out.
    fn run(&mut self) -> bool {
        let (mut bland, mut streak) = (false, 0);
        loop {
            let entering = if bland {
                (0..self.ncols).find(|&j| !self.barred[j] && self.obj[j] < -EPS)
            } else {
                (0..self.ncols).filter(|&j| !self.barred[j] && self.obj[j] < -EPS).min_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]))
            };
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a <= EPS {
                    continue;
                }
                let ratio = self.rows[i][self.ncols].max(0.0) / a;
                let better = match best {
                    None => true,
                    Some((bi, br)) => ratio < br - EPS || (ratio <= br + EPS && self.basis[i] < self.basis[bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = best else { return false };
            if self.budget == 0 {
                return false;
            }
            self.budget -= 1;
            if ratio <= EPS {
                streak += 1;
                bland |= streak >= DEGENERATE_STREAK;
            } else {
                streak = 0;
            }
            self.pivot(r, c);
        }
    }
}

/// A basis that the float simplex believes optimal.
fn float_basis(st: &Standard) -> Option<(Vec<usize>, usize)> {
    let w = st.ncols + 1;
    let mut rows = vec![vec![0.0; w]; st.m];
    for (j, col) in st.cols.iter().enumerate() {
        for (i, a) in col {
            rows[*i][j] = a.to_f64();
        }
    }
    for (i, b) in st.rhs.iter().enumerate() {
        rows[i][st.ncols] = b.to_f64();
    }
    let budget = 50 * (st.m + st.ncols);
    let mut t = FloatTableau { rows, obj: Vec::new(), basis: st.start.clone(), ncols: st.ncols, barred: vec![false; st.ncols], budget };
    if st.is_art.iter().any(|&a| a) {
        let c1: Vec<f64> = st.is_art.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        t.set_objective(&c1);
        if !t.run() || t.obj[st.ncols] < -1e-7 {
            return None;
        }
        for i in 0..st.m {
            if !st.is_art[t.basis[i]] {
                continue;
            }
            let best = (0..st.ncols).filter(|&j| !st.is_art[j]).max_by(|&a, &b| t.rows[i][a].abs().total_cmp(&t.rows[i][b].abs()));
            if let Some(j) = best.filter(|&j| t.rows[i][j].abs() > 1e-7) {
                t.pivot(i, j);
            }
        }
        t.barred.clone_from(&st.is_art);
    }
    let c2: Vec<f64> = st.cost.iter().map(Rational::to_f64).collect();
    t.set_objective(&c2);
    if !t.run() {
        return None;
    }
    let used = 50 * (st.m + st.ncols) - t.budget;
    Some((t.basis, used))
}

/// Solves `M z = rhs` for square `M`, or `None` if `M` is singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let m = a.len();
    for k in 0..m {
        let p = (k..m).find(|&i| !a[i][k].is_zero())?;
        a.swap(k, p);
        rhs.swap(k, p);
        let inv = a[k][k].recip();
        let pivot_row = std::mem::take(&mut a[k]);
        let nz: Vec<usize> = (k + 1..m).filter(|&j| !pivot_row[j].is_zero()).collect();
        let pb = rhs[k].clone();
        for i in k + 1..m {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] * &inv;
            for &j in &nz {
                let d = &f * &pivot_row[j];
                a[i][j] -= &d;
            }
            a[i][k] = Rational::zero();
            let d = &f * &pb;
            rhs[i] -= &d;
        }
        a[k] = pivot_row;
    }
    let mut z = vec![Rational::zero(); m];
    for k in (0..m).rev() {
        let mut s = rhs[k].clone();
        for j in k + 1..m {
            if !a[k][j].is_zero() {
                s -= &(&a[k][j] * &z[j]);
            }
        }
        z[k] = &s / &a[k][k];
    }
    Some(z)
}

fn certify(lp: &LinearProgram, st: &Standard, basis: &[usize], pivots: usize) -> Option<LpSolution> {
    let m = st.m;
    let mut bmat = vec![vec![Rational::zero(); m]; m];
    let mut bt = vec![vec![Rational::zero(); m]; m];
    for (k, &j) in basis.iter().enumerate() {
        for (i, a) in &st.cols[j] {
            bmat[*i][k] = a.clone();
            bt[k][*i] = a.clone();
        }
    }
    let xb = solve_square(bmat, st.rhs.clone())?;
    for (k, &j) in basis.iter().enumerate() {
        if xb[k].is_negative() || (st.is_art[j] && !xb[k].is_zero()) {
            return None;
        }
    }
    let cb: Vec<Rational> = basis.iter().map(|&j| st.cost[j].clone()).collect();
    let y = solve_square(bt, cb)?;
    for j in 0..st.ncols {
        if st.is_art[j] {
            continue;
        }
        let ya: Rational = st.cols[j].iter().map(|(i, a)| &y[*i] * a).sum();
        if (&st.cost[j] - &ya).is_positive() {
            return None;
        }
    }
    let n = lp.num_vars;
    let mut x = vec![Rational::zero(); n];
    let mut value = Rational::zero();
    for (k, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = xb[k].clone();
        }
        value += &(&st.cost[j] * &xb[k]);
    }
    let flip = lp.sense == Sense::Minimize;
    let duals = y
        .iter()
        .zip(&st.sign)
        .map(|(v, s)| {
            let d = v * &Rational::from_int(*s);
            if flip {
                -d
            } else {
                d
            }
        })
        .collect();
    let objective = if flip { -value } else { value };
    Some(LpSolution { x, objective, duals, pivots })
}

/// Same contract as [`solve_lp_exact`]; usually much faster on programs
/// with many degenerate pivots.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let st = standardize(lp);
    if st.m > 0 {
        if let Some((basis, pivots)) = float_basis(&st) {
            if let Some(sol) = certify(lp, &st, &basis, pivots) {
                return Ok(sol);
            }
        }
    }
    solve_lp_exact(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn matches_exact_on_a_degenerate_minimization() {
        let mut lp = LinearProgram::new(4, Sense::Minimize);
        lp.set_objective(0, r(2));
        lp.set_objective(1, r(3));
        lp.set_objective(2, r(1));
        lp.add(vec![(0, r(1)), (1, r(1)), (2, r(1))], Relation::Eq, r(1));
        lp.add(vec![(0, r(1)), (3, r(-1))], Relation::Eq, r(0));
        lp.add(vec![(1, r(2)), (2, r(-1))], Relation::Ge, r(0));
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp_exact(&lp).unwrap();
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.objective, Rational::new(5, 3));
    }

    #[test]
    fn infeasible_and_unbounded_fall_back() {
        let mut lp = LinearProgram::new(1, Sense::Maximize);
        lp.add(vec![(0, r(1))], Relation::Le, r(-1));
        assert!(matches!(solve_lp(&lp), Err(LpError::Infeasible { .. })));
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, r(1));
        lp.add(vec![(0, r(1)), (1, r(-1))], Relation::Le, r(3));
        assert_eq!(solve_lp(&lp).unwrap_err(), LpError::Unbounded);
    }

    proptest! {
        #[test]
        fn agrees_with_exact(
            obj in prop::collection::vec(-3i64..4, 4),
            rows in prop::collection::vec((prop::collection::vec(-3i64..4, 4), 0usize..3, -4i64..8), 1..6),
            maximize in any::<bool>(),
        ) {
            let mut lp = LinearProgram::new(4, if maximize { Sense::Maximize } else { Sense::Minimize });
            for (j, c) in obj.iter().enumerate() {
                lp.set_objective(j, r(*c));
            }
            for (a, rel, b) in &rows {
                let rel = [Relation::Le, Relation::Ge, Relation::Eq][*rel];
                lp.add(a.iter().enumerate().map(|(j, v)| (j, r(*v))).collect(), rel, r(*b));
            }
            // keep it bounded
            lp.add((0..4).map(|j| (j, r(1))).collect(), Relation::Le, r(20));
            match (solve_lp(&lp), solve_lp_exact(&lp)) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(&a.objective, &b.objective);
                    let lhs: Rational = (0..4).map(|j| &lp.objective[j] * &a.x[j]).sum();
                    prop_assert_eq!(lhs, a.objective.clone());
                    let dual_value: Rational = lp.constraints.iter().zip(&a.duals).map(|(c, y)| &c.rhs * y).sum();
                    prop_assert_eq!(dual_value, a.objective);
                }
                (Err(a), Err(b)) => prop_assert_eq!(std::mem::discriminant(&a), std::mem::discriminant(&b)),
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a.is_ok(), b.is_ok()),
            }
        }
    }
}
