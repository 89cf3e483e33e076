//! Two-phase dense simplex over exact rationals or tolerance-aware floats.
//!
//! Exact mode pivots by Bland's rule, which cannot cycle; approx mode starts
//! with Dantzig pricing and falls back to Bland's rule when it stalls.
//! Solutions carry dual multipliers in the orientation of the constraints as
//! given, and infeasibility carries a Farkas certificate.

use crate::linalg::Vector;
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint<S> {
    pub coeffs: Vector<S>,
    pub cmp: Cmp,
    pub rhs: S,
}

/// Maximize `objective . x` subject to the constraints; variables with
/// `nonneg[i]` set are restricted to x_i >= 0, the rest are free.
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub objective: Vector<S>,
    pub nonneg: Vec<bool>,
    pub constraints: Vec<Constraint<S>>,
}

#[derive(Debug, Error)]
pub enum LpError<S: Scalar> {
    /// No feasible point; the certificate y aggregates the constraint rows
    /// (in their given orientation) into sum_i y_i row_i >= 0 on every
    /// admissible x while sum_i y_i rhs_i < 0.
    #[error("linear program is infeasible")]
    Infeasible { farkas: Vec<S> },
    #[error("linear program is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub value: S,
    pub x: Vector<S>,
    /// One multiplier per constraint, oriented so that Le rows have dual >= 0
    /// and Ge rows have dual <= 0.
    pub dual: Vector<S>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(objective: Vector<S>, nonneg: Vec<bool>) -> Self {
        assert_eq!(objective.len(), nonneg.len());
        LinearProgram { objective, nonneg, constraints: Vec::new() }
    }

    /// All variables nonnegative.
    pub fn new_nonneg(objective: Vector<S>) -> Self {
        let n = objective.len();
        Self::new(objective, vec![true; n])
    }

    pub fn add(&mut self, coeffs: Vector<S>, cmp: Cmp, rhs: S) {
        assert_eq!(coeffs.len(), self.objective.len());
        self.constraints.push(Constraint { coeffs, cmp, rhs });
    }
}

// ---------------------------------------------------------------------------
// tableau
// ---------------------------------------------------------------------------

struct Tableau<S> {
    rows: Vec<Vector<S>>, // m rows of n_cols entries plus rhs
    obj: Vector<S>,       // reduced costs z_j - c_j plus value cell
    basis: Vec<usize>,
    n_cols: usize,
    art_start: usize,          // columns >= art_start are artificial
    col_var: Vec<(usize, bool)>, // variable columns: (var index, positive part)
    id_col: Vec<usize>,        // initial identity column per row
    row_flip: Vec<bool>,
    tol: S,
    bland: bool,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl<S: Scalar> Tableau<S> {
    fn build(lp: &LinearProgram<S>) -> Self {
        let tol = S::default_tol();
        let m = lp.constraints.len();

        let mut col_var = Vec::new();
        for (i, &nn) in lp.nonneg.iter().enumerate() {
            col_var.push((i, true));
            if !nn {
                col_var.push((i, false));
            }
        }
        let n_var_cols = col_var.len();

        // One slack or surplus column per Le/Ge row, then artificials for
        // every Ge/Eq row, laid out after the variable columns.
        let mut normalized = Vec::with_capacity(m);
        let mut row_flip = vec![false; m];
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut coeffs = c.coeffs.clone();
            let mut rhs = c.rhs.clone();
            let mut cmp = c.cmp;
            if rhs.sign_tol(&tol) < 0 {
                coeffs = coeffs.iter().map(|x| -x.clone()).collect();
                rhs = -rhs;
                cmp = match cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                row_flip[i] = true;
            }
            normalized.push((coeffs, cmp, rhs));
        }
        let n_slack = normalized.iter().filter(|(_, c, _)| *c != Cmp::Eq).count();
        let n_art = normalized.iter().filter(|(_, c, _)| *c != Cmp::Le).count();
        let art_start = n_var_cols + n_slack;
        let n_cols = art_start + n_art;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut id_col = Vec::with_capacity(m);
        let mut next_slack = n_var_cols;
        let mut next_art = art_start;
        for (coeffs, cmp, rhs) in &normalized {
            let mut row = vec![S::zero(); n_cols + 1];
            for (j, &(v, pos)) in col_var.iter().enumerate() {
                row[j] = if pos { coeffs[v].clone() } else { -coeffs[v].clone() };
            }
            match cmp {
                Cmp::Le => {
                    row[next_slack] = S::one();
                    basis.push(next_slack);
                    id_col.push(next_slack);
                    next_slack += 1;
                }
                Cmp::Ge => {
                    row[next_slack] = -S::one();
                    next_slack += 1;
                    row[next_art] = S::one();
                    basis.push(next_art);
                    id_col.push(next_art);
                    next_art += 1;
                }
                Cmp::Eq => {
                    row[next_art] = S::one();
                    basis.push(next_art);
                    id_col.push(next_art);
                    next_art += 1;
                }
            }
            row[n_cols] = rhs.clone();
            rows.push(row);
        }

        Tableau {
            rows,
            obj: vec![S::zero(); n_cols + 1],
            basis,
            n_cols,
            art_start,
            col_var,
            id_col,
            row_flip,
            tol,
            bland: S::EXACT,
            pivots: 0,
        }
    }

    /// Recompute reduced costs z_j - c_j for the given standard-form costs.
    fn set_costs(&mut self, costs: &[S]) {
        for j in 0..=self.n_cols {
            let mut z = S::zero();
            for (i, row) in self.rows.iter().enumerate() {
                let cb = &costs[self.basis[i]];
                if !cb.is_zero_tol(&self.tol) {
                    z = z + cb.clone() * row[j].clone();
                }
            }
            self.obj[j] = if j < self.n_cols { z - costs[j].clone() } else { z };
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() / p.clone();
        }
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero_tol(&self.tol) {
                continue;
            }
            for j in 0..=self.n_cols {
                let d = f.clone() * self.rows[r][j].clone();
                self.rows[i][j] = self.rows[i][j].clone() - d;
            }
        }
        let f = self.obj[c].clone();
        if !f.is_zero_tol(&self.tol) {
            for j in 0..=self.n_cols {
                let d = f.clone() * self.rows[r][j].clone();
                self.obj[j] = self.obj[j].clone() - d;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn entering(&self, allow_art: bool) -> Option<usize> {
        let limit = if allow_art { self.n_cols } else { self.art_start };
        if self.bland {
            (0..limit).find(|&j| self.obj[j].sign_tol(&self.tol) < 0)
        } else {
            let mut best: Option<(usize, S)> = None;
            for j in 0..limit {
                if self.obj[j].sign_tol(&self.tol) < 0 {
                    let better = match &best {
                        None => true,
                        Some((_, v)) => self.obj[j] < *v,
                    };
                    if better {
                        best = Some((j, self.obj[j].clone()));
                    }
                }
            }
            best.map(|(j, _)| j)
        }
    }

    fn leaving(&self, c: usize) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if row[c].sign_tol(&self.tol) <= 0 {
                continue;
            }
            let ratio = row[self.n_cols].clone() / row[c].clone();
            let replace = match &best {
                None => true,
                Some((bi, bv)) => {
                    ratio < *bv
                        || ((ratio.clone() - bv.clone()).is_zero_tol(&self.tol)
                            && self.basis[i] < self.basis[*bi])
                }
            };
            if replace {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, allow_art: bool) -> Step {
        let stall_cap = 20 * (self.rows.len() + self.n_cols) + 100;
        let hard_cap = 200 * (self.rows.len() + self.n_cols) + 10_000;
        loop {
            if !self.bland && self.pivots > stall_cap {
                self.bland = true;
            }
            assert!(self.pivots <= hard_cap, "simplex did not terminate");
            let Some(c) = self.entering(allow_art) else { return Step::Optimal };
            let Some(r) = self.leaving(c) else { return Step::Unbounded };
            self.pivot(r, c);
        }
    }

    /// Dual multipliers for the given standard-form costs, one per row, in
    /// the original constraint orientation.
    fn duals(&self, costs: &[S]) -> Vector<S> {
        (0..self.rows.len())
            .map(|i| {
                let k = self.id_col[i];
                let y = self.obj[k].clone() + costs[k].clone();
                if self.row_flip[i] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

pub fn solve<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>, LpError<S>> {
    let tol = S::default_tol();
    let mut t = Tableau::build(lp);

    // Phase 1: maximize minus the sum of artificials.
    if t.art_start < t.n_cols {
        let mut costs = vec![S::zero(); t.n_cols];
        for c in costs.iter_mut().skip(t.art_start) {
            *c = -S::one();
        }
        t.set_costs(&costs);
        match t.run(true) {
            Step::Unbounded => unreachable!("phase 1 objective is bounded above by zero"),
            Step::Optimal => {}
        }
        if t.obj[t.n_cols].sign_tol(&tol) < 0 {
            return Err(LpError::Infeasible { farkas: t.duals(&costs) });
        }
    }

    // Phase 2: the real objective over variable columns only.
    let mut costs = vec![S::zero(); t.n_cols];
    for (j, &(v, pos)) in t.col_var.iter().enumerate() {
        costs[j] = if pos { lp.objective[v].clone() } else { -lp.objective[v].clone() };
    }
    t.set_costs(&costs);
    if let Step::Unbounded = t.run(false) {
        return Err(LpError::Unbounded);
    }

    let mut x = vec![S::zero(); lp.objective.len()];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < t.col_var.len() {
            let (v, pos) = t.col_var[b];
            let val = t.rows[i][t.n_cols].clone();
            x[v] = if pos { x[v].clone() + val } else { x[v].clone() - val };
        }
    }
    let value = lp
        .objective
        .iter()
        .zip(&x)
        .fold(S::zero(), |a, (c, xi)| a + c.clone() * xi.clone());
    let dual = t.duals(&costs);
    Ok(LpSolution { value, x, dual })
}

/// Check a solution against the optimality certificate: primal feasibility,
/// dual feasibility with the right sign per constraint sense, and matching
/// primal and dual objective values.
pub fn verify_certificate<S: Scalar>(lp: &LinearProgram<S>, sol: &LpSolution<S>, tol: &S) -> bool {
    let n = lp.objective.len();
    for (i, &nn) in lp.nonneg.iter().enumerate() {
        if nn && sol.x[i].sign_tol(tol) < 0 {
            return false;
        }
    }
    for c in &lp.constraints {
        let lhs = crate::linalg::dot(&c.coeffs, &sol.x);
        let d = lhs - c.rhs.clone();
        let ok = match c.cmp {
            Cmp::Le => d.sign_tol(tol) <= 0,
            Cmp::Ge => d.sign_tol(tol) >= 0,
            Cmp::Eq => d.is_zero_tol(tol),
        };
        if !ok {
            return false;
        }
    }
    for (y, c) in sol.dual.iter().zip(&lp.constraints) {
        let ok = match c.cmp {
            Cmp::Le => y.sign_tol(tol) >= 0,
            Cmp::Ge => y.sign_tol(tol) <= 0,
            Cmp::Eq => true,
        };
        if !ok {
            return false;
        }
    }
    for j in 0..n {
        let col = sol
            .dual
            .iter()
            .zip(&lp.constraints)
            .fold(S::zero(), |a, (y, c)| a + y.clone() * c.coeffs[j].clone());
        let slack = col - lp.objective[j].clone();
        let ok = if lp.nonneg[j] { slack.sign_tol(tol) >= 0 } else { slack.is_zero_tol(tol) };
        if !ok {
            return false;
        }
    }
    let dual_value = sol
        .dual
        .iter()
        .zip(&lp.constraints)
        .fold(S::zero(), |a, (y, c)| a + y.clone() * c.rhs.clone());
    (dual_value - sol.value.clone()).is_zero_tol(tol)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
