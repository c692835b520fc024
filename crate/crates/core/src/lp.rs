//! Dense two-phase simplex over `x >= 0` with mixed `<=`/`>=`/`=` rows.
//!
//! Sized for the solver and audit subproblems in this crate: tens of rows,
//! up to a few thousand columns. Entering variables follow Dantzig pricing
//! and fall back to Bland's rule after a fixed iteration budget so
//! degenerate instances cannot cycle. Infeasibility and unboundedness are
//! ordinary outcomes, not errors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        Constraint { coeffs, sense, rhs }
    }
}

/// Maximize `objective . x` subject to the rows; `x >= 0` implicit.
#[derive(Debug, Clone)]
pub struct Lp {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Result<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Ok(s),
            LpOutcome::Infeasible => Err(Error::DegenerateLp("expected feasible program".into())),
            LpOutcome::Unbounded => Err(Error::DegenerateLp("expected bounded program".into())),
        }
    }
}

const PIVOT_EPS: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
/// Dantzig pricing until this many pivots, Bland afterwards.
const BLAND_AFTER: usize = 10_000;
const MAX_PIVOTS: usize = 1_000_000;

struct Tableau {
    /// `m` rows, each `cols + 1` long with the rhs last.
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row, same width, objective value (negated) last.
    obj: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        for i in 0..self.rows.len() {
            if i != r {
                let f = self.rows[i][c];
                if f != 0.0 {
                    for j in 0..=self.cols {
                        self.rows[i][j] -= f * self.rows[r][j];
                    }
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for j in 0..=self.cols {
                self.obj[j] -= f * self.rows[r][j];
            }
        }
        self.basis[r] = c;
        for row in self.rows.iter_mut() {
            if row[self.cols] < 0.0 && row[self.cols] > -PIVOT_EPS {
                row[self.cols] = 0.0;
            }
        }
    }

    /// Runs simplex on the current objective row. Returns false when an
    /// unbounded ray is found.
    fn optimize(&mut self, pivots: &mut usize) -> Result<bool> {
        loop {
            let entering = if *pivots < BLAND_AFTER {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.cols {
                    let d = self.obj[j];
                    if d > PIVOT_EPS && best.map_or(true, |(_, bd)| d > bd) {
                        best = Some((j, d));
                    }
                }
                best.map(|(j, _)| j)
            } else {
                (0..self.cols).find(|&j| self.obj[j] > PIVOT_EPS)
            };
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r).max(0.0) / a;
                    let replace = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_EPS
                                || (ratio < lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if replace {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, c);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::DegenerateLp("pivot budget exhausted".into()));
            }
        }
    }

    /// Rebuilds the reduced-cost row for `costs` (maximization) against the
    /// current basis.
    fn load_objective(&mut self, costs: &[f64]) {
        self.obj = vec![0.0; self.cols + 1];
        self.obj[..costs.len()].copy_from_slice(costs);
        for r in 0..self.rows.len() {
            let cb = if self.basis[r] < costs.len() {
                costs[self.basis[r]]
            } else {
                0.0
            };
            if cb != 0.0 {
                for j in 0..=self.cols {
                    self.obj[j] -= cb * self.rows[r][j];
                }
            }
        }
    }
}

pub fn solve(lp: &Lp) -> Result<LpOutcome> {
    let n = lp.objective.len();
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(Error::InvalidParameter(format!(
                "constraint {i} has {} coefficients, expected {n}",
                c.coeffs.len()
            )));
        }
        if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "constraint {i} contains a non-finite value"
            )));
        }
    }
    if lp.objective.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "objective contains a non-finite value".into(),
        ));
    }

    let m = lp.constraints.len();
    // Flip rows so every rhs is non-negative.
    let rows_in: Vec<(Vec<f64>, Sense, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let flipped = match c.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (c.coeffs.clone(), c.sense, c.rhs)
            }
        })
        .collect();

    let n_slack = rows_in
        .iter()
        .filter(|(_, s, _)| matches!(s, Sense::Le | Sense::Ge))
        .count();
    let n_art = rows_in
        .iter()
        .filter(|(_, s, _)| matches!(s, Sense::Ge | Sense::Eq))
        .count();
    let cols = n + n_slack + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack_at = n;
    let mut art_at = n + n_slack;
    for (coeffs, sense, rhs) in &rows_in {
        let mut row = vec![0.0; cols + 1];
        row[..n].copy_from_slice(coeffs);
        row[cols] = *rhs;
        match sense {
            Sense::Le => {
                row[slack_at] = 1.0;
                basis.push(slack_at);
                slack_at += 1;
            }
            Sense::Ge => {
                row[slack_at] = -1.0;
                slack_at += 1;
                row[art_at] = 1.0;
                basis.push(art_at);
                art_at += 1;
            }
            Sense::Eq => {
                row[art_at] = 1.0;
                basis.push(art_at);
                art_at += 1;
            }
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: vec![0.0; cols + 1],
        basis,
        cols,
    };
    let mut pivots = 0usize;

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(n + n_slack) {
            *c = -1.0;
        }
        t.load_objective(&phase1);
        if !t.optimize(&mut pivots)? {
            return Err(Error::DegenerateLp("phase one became unbounded".into()));
        }
        let art_total: f64 = (0..m)
            .filter(|&r| t.basis[r] >= n + n_slack)
            .map(|r| t.rhs(r).max(0.0))
            .sum();
        if art_total > FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot any artificial still basic (at zero) out on a real column.
        for r in 0..m {
            if t.basis[r] >= n + n_slack {
                if let Some(c) = (0..n + n_slack).find(|&j| t.rows[r][j].abs() > PIVOT_EPS) {
                    t.pivot(r, c);
                    pivots += 1;
                }
            }
        }
        // Freeze artificial columns so phase two cannot re-enter them.
        for row in t.rows.iter_mut() {
            for j in n + n_slack..cols {
                row[j] = 0.0;
            }
        }
    }

    let mut costs = vec![0.0; cols];
    costs[..n].copy_from_slice(&lp.objective);
    t.load_objective(&costs);
    if !t.optimize(&mut pivots)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal(LpSolution { x, objective }))
}
