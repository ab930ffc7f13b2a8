//! Dense two-phase primal simplex over exact rationals.
//!
//! Pivoting uses the most-negative reduced cost until a run of degenerate
//! pivots is observed, after which it switches permanently to Bland's rule,
//! so every solve terminates. Leaving-row ties always go to the smallest
//! basic column index.

use super::Rational;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// One row `Σ coeffs · x (rel) rhs`. Coefficients are sparse `(var, value)`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) -> Constraint {
        Constraint { coeffs, rel, rhs }
    }
}

/// A linear program over non-negative variables `x_0 .. x_{n-1}`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> LinearProgram {
        LinearProgram { num_vars, sense, objective: vec![Rational::zero(); num_vars], constraints: Vec::new() }
    }

    pub fn set_objective(&mut self, var: usize, c: Rational) {
        self.objective[var] = c;
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) -> usize {
        debug_assert!(coeffs.iter().all(|(v, _)| *v < self.num_vars));
        self.constraints.push(Constraint::new(coeffs, rel, rhs));
        self.constraints.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub objective: Rational,
    /// Shadow prices: `duals[i]` is the rate of change of the optimal
    /// objective with respect to `rhs_i`.
    pub duals: Vec<Rational>,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpError {
    /// `certificate` is a row vector `y` with `yᵀA ≥ 0` over the structural
    /// columns and `yᵀb < 0` (for all-equality systems this is a Farkas
    /// certificate).
    Infeasible {
        certificate: Vec<Rational>,
    },
    Unbounded,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible { .. } => write!(f, "linear program is infeasible"),
            LpError::Unbounded => write!(f, "linear program is unbounded"),
        }
    }
}

impl std::error::Error for LpError {}

const DEGENERATE_STREAK: usize = 64;

struct Tableau {
    rows: Vec<Vec<Rational>>,
    // reduced costs z_j - c_j; last entry is the objective value
    obj: Vec<Rational>,
    basis: Vec<usize>,
    ncols: usize,
    barred: Vec<bool>,
    bland: bool,
    streak: usize,
    pivots: usize,
}

enum Status {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.ncols]
    }

    fn entering(&self) -> Option<usize> {
        if self.bland {
            (0..self.ncols).find(|&j| !self.barred[j] && self.obj[j].is_negative())
        } else {
            let mut best: Option<usize> = None;
            for j in 0..self.ncols {
                if self.barred[j] || !self.obj[j].is_negative() {
                    continue;
                }
                if best.is_none_or(|b| self.obj[j] < self.obj[b]) {
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..self.rows.len() {
            let a = &self.rows[i][col];
            if !a.is_positive() {
                continue;
            }
            let ratio = self.rhs(i) / a;
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let inv = self.rows[r][c].recip();
        let width = self.ncols + 1;
        let mut nz = Vec::new();
        for j in 0..width {
            if !self.rows[r][j].is_zero() {
                let v = &self.rows[r][j] * &inv;
                self.rows[r][j] = v;
                nz.push(j);
            }
        }
        let prow = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                row[j] -= &d;
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                self.obj[j] -= &d;
            }
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    fn run(&mut self) -> Status {
        loop {
            let Some(c) = self.entering() else { return Status::Optimal };
            let Some(r) = self.leaving(c) else { return Status::Unbounded };
            if self.rhs(r).is_zero() {
                self.streak += 1;
                if self.streak >= DEGENERATE_STREAK {
                    self.bland = true;
                }
            } else {
                self.streak = 0;
            }
            self.pivot(r, c);
        }
    }

    fn set_objective(&mut self, c: &[Rational]) {
        let width = self.ncols + 1;
        let mut obj: Vec<Rational> = (0..width).map(|j| if j < self.ncols { -&c[j] } else { Rational::zero() }).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &c[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..width {
                if !row[j].is_zero() {
                    let d = cb * &row[j];
                    obj[j] += &d;
                }
            }
        }
        self.obj = obj;
    }

    /// `c_B B⁻¹ e_i` for every row, read off the unit columns.
    fn row_duals(&self, unit_col: &[usize], c: &[Rational]) -> Vec<Rational> {
        unit_col.iter().map(|&j| &self.obj[j] + &c[j]).collect()
    }
}

/// Solve `lp` exactly.
pub fn solve_lp_exact(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars;
    let m = lp.constraints.len();

    // Normalize rows to non-negative right-hand sides.
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

    // Column layout: structural | slack or surplus | artificial.
    let mut next = n;
    let mut slack_col = vec![usize::MAX; m];
    for i in 0..m {
        if rel[i] != Relation::Eq {
            slack_col[i] = next;
            next += 1;
        }
    }
    let mut art_col = vec![usize::MAX; m];
    for i in 0..m {
        if rel[i] != Relation::Le {
            art_col[i] = next;
            next += 1;
        }
    }
    let ncols = next;
    let width = ncols + 1;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut unit_col = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut row = vec![Rational::zero(); width];
        let s = Rational::from_int(sign[i]);
        for (v, a) in &c.coeffs {
            row[*v] += &(a * &s);
        }
        row[ncols] = &c.rhs * &s;
        match rel[i] {
            Relation::Le => {
                row[slack_col[i]] = Rational::one();
                basis.push(slack_col[i]);
                unit_col.push(slack_col[i]);
            }
            Relation::Ge => {
                row[slack_col[i]] = Rational::from_int(-1);
                row[art_col[i]] = Rational::one();
                basis.push(art_col[i]);
                unit_col.push(art_col[i]);
            }
            Relation::Eq => {
                row[art_col[i]] = Rational::one();
                basis.push(art_col[i]);
                unit_col.push(art_col[i]);
            }
        }
        rows.push(row);
    }

    let mut is_art = vec![false; ncols];
    for &a in &art_col {
        if a != usize::MAX {
            is_art[a] = true;
        }
    }

    let mut t = Tableau { rows, obj: Vec::new(), basis, ncols, barred: vec![false; ncols], bland: false, streak: 0, pivots: 0 };

    if is_art.iter().any(|&a| a) {
        let c1: Vec<Rational> = (0..ncols).map(|j| if is_art[j] { Rational::from_int(-1) } else { Rational::zero() }).collect();
        t.set_objective(&c1);
        match t.run() {
            Status::Optimal => {}
            Status::Unbounded => unreachable!("phase one objective is bounded above by zero"),
        }
        if t.obj[ncols].is_negative() {
            let y = t.row_duals(&unit_col, &c1);
            let certificate = y.iter().zip(&sign).map(|(v, s)| v * &Rational::from_int(*s)).collect();
            return Err(LpError::Infeasible { certificate });
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if !is_art[t.basis[i]] {
                continue;
            }
            if let Some(j) = (0..ncols).find(|&j| !is_art[j] && !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
        t.barred.copy_from_slice(&is_art);
        t.bland = false;
        t.streak = 0;
    }

    let flip = lp.sense == Sense::Minimize;
    let c2: Vec<Rational> = (0..ncols)
        .map(|j| {
            if j < n {
                if flip {
                    -&lp.objective[j]
                } else {
                    lp.objective[j].clone()
                }
            } else {
                Rational::zero()
            }
        })
        .collect();
    t.set_objective(&c2);
    if let Status::Unbounded = t.run() {
        return Err(LpError::Unbounded);
    }

    let mut x = vec![Rational::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i).clone();
        }
    }
    let y = t.row_duals(&unit_col, &c2);
    let duals = y
        .iter()
        .zip(&sign)
        .map(|(v, s)| {
            let d = v * &Rational::from_int(*s);
            if flip {
                -d
            } else {
                d
            }
        })
        .collect();
    let objective = if flip { -&t.obj[ncols] } else { t.obj[ncols].clone() };
    Ok(LpSolution { x, objective, duals, pivots: t.pivots })
}
