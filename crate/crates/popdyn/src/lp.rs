//! Small dense linear-programming kernel: two-phase simplex with Bland's rule.
//!
//! Sized for desk-scale problems (tens of variables, a few hundred rows); used
//! for strict-feasibility tests of open regions, facet checks, and the
//! convex-combination membership programs of the attractor analysis.

use thiserror::Error;

use crate::game::Aggregate;

const PIVOT_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;
const MAX_VARS: usize = 64;
const MAX_CONSTRAINTS: usize = 512;
const MAX_ITER: usize = 50_000;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("problem too large: {vars} vars / {constraints} constraints (caps {MAX_VARS}/{MAX_CONSTRAINTS})")]
    TooLarge { vars: usize, constraints: usize },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

/// `maximize objective·x` subject to equalities, `coeffs·x ≥ rhs` inequalities
/// and per-variable bounds (`None` = unbounded on that side).
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub ge: Vec<(Vec<f64>, f64)>,
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

enum VarKind {
    /// x = lo + y
    Shift { lo: f64 },
    /// x = hi − y
    Mirror { hi: f64 },
    /// x = y⁺ − y⁻ (two columns)
    Free,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// basic column per row
    basis: Vec<usize>,
    obj: Vec<f64>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i != row && r[col].abs() > 0.0 {
                let f = r[col];
                for (v, p) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                r[col] = 0.0;
            }
        }
        let f = self.obj[col];
        if f.abs() > 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Bland's rule iteration to optimality. `allowed` masks enterable columns.
    fn run(&mut self, allowed: &[bool]) -> Result<bool, LpError> {
        for _ in 0..MAX_ITER {
            // entering: smallest-index column with negative objective-row entry
            let enter = (0..self.n_cols)
                .find(|&j| allowed[j] && self.obj[j] < -PIVOT_TOL);
            let Some(col) = enter else {
                return Ok(true); // optimal
            };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            let mut tiny_only = false;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][self.n_cols] / a;
                    let better = ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12
                            && leave.map(|l| self.basis[i] < self.basis[l]).unwrap_or(true));
                    if better {
                        best_ratio = best_ratio.min(ratio);
                        leave = Some(i);
                    }
                } else if a > 0.0 {
                    tiny_only = true;
                }
            }
            match leave {
                Some(row) => self.pivot(row, col),
                None if tiny_only => {
                    return Err(LpError::NumericalBreakdown(format!(
                        "all candidate pivots in column {col} below {PIVOT_TOL:.0e}"
                    )))
                }
                None => return Ok(false), // unbounded
            }
        }
        Err(LpError::NumericalBreakdown("iteration cap exceeded".into()))
    }
}

impl LinearProgram {
    /// Solves by two-phase dense simplex.
    pub fn solve(&self) -> Result<LpOutcome, LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "bounds has length {}, expected {}",
                self.bounds.len(),
                n
            )));
        }
        for (what, rows) in [("eq", &self.eq), ("ge", &self.ge)] {
            if let Some(bad) = rows.iter().position(|(c, _)| c.len() != n) {
                return Err(LpError::DimensionMismatch(format!(
                    "{what} constraint {bad} has {} coefficients, expected {n}",
                    rows[bad].0.len()
                )));
            }
        }
        let n_constraints = self.eq.len() + self.ge.len();
        if n > MAX_VARS || n_constraints > MAX_CONSTRAINTS {
            return Err(LpError::TooLarge { vars: n, constraints: n_constraints });
        }

        // Transform variables to y ≥ 0.
        let mut kinds = Vec::with_capacity(n);
        let mut col = 0usize;
        let mut upper_rows: Vec<(usize, f64)> = Vec::new(); // (column, ub on y)
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(h)) = (lo, hi) {
                if l > h {
                    return Err(LpError::DimensionMismatch(format!(
                        "variable {j}: lower bound {l} exceeds upper bound {h}"
                    )));
                }
            }
            match (lo, hi) {
                (Some(l), h) => {
                    if let Some(h) = h {
                        upper_rows.push((col, h - l));
                    }
                    kinds.push((VarKind::Shift { lo: l }, col));
                    col += 1;
                }
                (None, Some(h)) => {
                    kinds.push((VarKind::Mirror { hi: h }, col));
                    col += 1;
                }
                (None, None) => {
                    kinds.push((VarKind::Free, col));
                    col += 2;
                }
            }
        }
        let n_y = col;

        // y-space coefficient row and constant shift for an x-space row.
        let to_y = |coeffs: &[f64]| -> (Vec<f64>, f64) {
            let mut row = vec![0.0; n_y];
            let mut shift = 0.0;
            for (j, &c) in coeffs.iter().enumerate() {
                match kinds[j] {
                    (VarKind::Shift { lo }, yc) => {
                        row[yc] += c;
                        shift += c * lo;
                    }
                    (VarKind::Mirror { hi }, yc) => {
                        row[yc] -= c;
                        shift += c * hi;
                    }
                    (VarKind::Free, yc) => {
                        row[yc] += c;
                        row[yc + 1] -= c;
                    }
                }
            }
            (row, shift)
        };

        let n_slack = self.ge.len() + upper_rows.len();
        let m = self.eq.len() + self.ge.len() + upper_rows.len();
        // columns: y | slacks | artificials | rhs
        let n_art = m;
        let n_cols = n_y + n_slack + n_art;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut needs_artificial: Vec<bool> = Vec::with_capacity(m);
        let mut slack_idx = 0usize;

        for (coeffs, rhs) in &self.eq {
            let (mut row, shift) = to_y(coeffs);
            row.resize(n_cols + 1, 0.0);
            row[n_cols] = rhs - shift;
            rows.push(row);
            needs_artificial.push(true);
        }
        for (coeffs, rhs) in &self.ge {
            let (mut row, shift) = to_y(coeffs);
            row.resize(n_cols + 1, 0.0);
            row[n_y + slack_idx] = -1.0; // surplus
            row[n_cols] = rhs - shift;
            slack_idx += 1;
            rows.push(row);
            needs_artificial.push(true);
        }
        for &(yc, ub) in &upper_rows {
            let mut row = vec![0.0; n_cols + 1];
            row[yc] = 1.0;
            row[n_y + slack_idx] = 1.0;
            row[n_cols] = ub;
            slack_idx += 1;
            rows.push(row);
            needs_artificial.push(false); // slack can start basic
        }

        // Normalize rhs ≥ 0, install starting basis.
        let mut basis = vec![0usize; m];
        for (i, row) in rows.iter_mut().enumerate() {
            if row[n_cols] < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
                // a flipped upper-bound row loses its +1 slack
                needs_artificial[i] = true;
            }
        }
        let mut art_used = vec![false; m];
        for i in 0..m {
            if needs_artificial[i] {
                rows[i][n_y + n_slack + i] = 1.0;
                art_used[i] = true;
                basis[i] = n_y + n_slack + i;
            } else {
                basis[i] = (0..n_y + n_slack)
                    .find(|&j| rows[i][j] == 1.0 && j >= n_y)
                    .expect("upper-bound row keeps its slack");
            }
        }

        // Phase 1: maximize −Σ artificials.
        let mut obj = vec![0.0; n_cols + 1];
        for i in 0..m {
            if art_used[i] {
                obj[n_y + n_slack + i] = 1.0; // −c_j with c_j = −1
            }
        }
        let mut t = Tableau { rows, basis, obj, n_cols };
        // canonicalize objective over the artificial basis
        for i in 0..m {
            if art_used[i] {
                let f = t.obj[t.basis[i]];
                if f != 0.0 {
                    let row = t.rows[i].clone();
                    for (v, p) in t.obj.iter_mut().zip(&row) {
                        *v -= f * p;
                    }
                }
            }
        }
        let allowed_p1 = vec![true; n_cols];
        if !t.run(&allowed_p1)? {
            return Err(LpError::NumericalBreakdown(
                "phase 1 reported an unbounded auxiliary problem".into(),
            ));
        }
        let infeasibility = -t.obj[n_cols];
        if infeasibility.abs() > FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }

        // Drive leftover artificials out of the basis (or drop redundant rows).
        let art_start = n_y + n_slack;
        let mut drop_rows = Vec::new();
        for i in 0..m {
            if t.basis[i] >= art_start {
                let pivot_col = (0..art_start).find(|&j| t.rows[i][j].abs() > 1e-9);
                match pivot_col {
                    Some(j) => t.pivot(i, j),
                    None => drop_rows.push(i),
                }
            }
        }
        for &i in drop_rows.iter().rev() {
            t.rows.remove(i);
            t.basis.remove(i);
        }

        // Phase 2 over the real objective; artificials barred from entering.
        let mut allowed = vec![true; n_cols];
        for a in allowed.iter_mut().skip(art_start) {
            *a = false;
        }
        let mut c_y = vec![0.0; n_cols];
        let mut const_term = 0.0;
        for (j, &cj) in self.objective.iter().enumerate() {
            match kinds[j] {
                (VarKind::Shift { lo }, yc) => {
                    c_y[yc] += cj;
                    const_term += cj * lo;
                }
                (VarKind::Mirror { hi }, yc) => {
                    c_y[yc] -= cj;
                    const_term += cj * hi;
                }
                (VarKind::Free, yc) => {
                    c_y[yc] += cj;
                    c_y[yc + 1] -= cj;
                }
            }
        }
        t.obj = c_y.iter().map(|c| -c).collect();
        t.obj.push(0.0);
        for i in 0..t.rows.len() {
            let f = t.obj[t.basis[i]];
            if f != 0.0 {
                let row = t.rows[i].clone();
                for (v, p) in t.obj.iter_mut().zip(&row) {
                    *v -= f * p;
                }
            }
        }
        if !t.run(&allowed)? {
            return Ok(LpOutcome::Unbounded);
        }

        // Extract solution.
        let mut y = vec![0.0; n_cols];
        for (i, &b) in t.basis.iter().enumerate() {
            y[b] = t.rows[i][n_cols];
        }
        let mut x = vec![0.0; n];
        for (j, kind) in kinds.iter().enumerate() {
            x[j] = match *kind {
                (VarKind::Shift { lo }, yc) => lo + y[yc],
                (VarKind::Mirror { hi }, yc) => hi - y[yc],
                (VarKind::Free, yc) => y[yc] - y[yc + 1],
            };
        }
        let value = t.obj[n_cols] + const_term;
        self.verify(&x)?;
        Ok(LpOutcome::Optimal { x, value })
    }

    /// Confirms a claimed solution satisfies every constraint within 1e-9.
    fn verify(&self, x: &[f64]) -> Result<(), LpError> {
        let dot = |c: &[f64]| c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        for (c, b) in &self.eq {
            if (dot(c) - b).abs() > FEAS_TOL {
                return Err(LpError::NumericalBreakdown(format!(
                    "equality residual {:.3e} in reported solution",
                    (dot(c) - b).abs()
                )));
            }
        }
        for (c, b) in &self.ge {
            if dot(c) < b - FEAS_TOL {
                return Err(LpError::NumericalBreakdown(format!(
                    "inequality violated by {:.3e} in reported solution",
                    b - dot(c)
                )));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.map(|l| x[j] < l - FEAS_TOL).unwrap_or(false)
                || hi.map(|h| x[j] > h + FEAS_TOL).unwrap_or(false)
            {
                return Err(LpError::NumericalBreakdown(format!(
                    "bound violated at variable {j} in reported solution"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StrictFeasibility {
    pub nonempty: bool,
    pub witness: Option<Aggregate>,
    /// Optimal margin of the most-binding strict inequality.
    pub slack: f64,
}

/// Tests whether `{ω on the k-simplex : grad_i·ω + offset_i > 0 ∀i}` is
/// nonempty by maximizing the common slack; `nonempty` iff the optimum
/// exceeds `eps`, with the maximizer as witness.
pub fn strict_feasible(
    halfspaces: &[(Vec<f64>, f64)],
    k: usize,
    eps: f64,
) -> Result<StrictFeasibility, LpError> {
    if halfspaces.is_empty() {
        return Ok(StrictFeasibility {
            nonempty: true,
            witness: Some(Aggregate::uniform(k)),
            slack: f64::INFINITY,
        });
    }
    // variables: ω_1..ω_k ∈ [0,1], s free; maximize s
    let n = k + 1;
    let mut objective = vec![0.0; n];
    objective[k] = 1.0;
    let mut eq_row = vec![0.0; n];
    eq_row[..k].fill(1.0);
    let mut ge = Vec::with_capacity(halfspaces.len());
    for (grad, offset) in halfspaces {
        if grad.len() != k {
            return Err(LpError::DimensionMismatch(format!(
                "halfspace gradient has {} entries, expected {k}",
                grad.len()
            )));
        }
        let mut row = grad.clone();
        row.push(-1.0);
        ge.push((row, -offset));
    }
    let mut bounds = vec![(Some(0.0), Some(1.0)); k];
    bounds.push((None, None));
    let lp = LinearProgram { objective, eq: vec![(eq_row, 1.0)], ge, bounds };
    match lp.solve()? {
        LpOutcome::Optimal { x, value } => {
            let nonempty = value > eps;
            let witness = if nonempty {
                Some(Aggregate::new(x[..k].to_vec()).map_err(|e| {
                    LpError::NumericalBreakdown(format!("witness off the simplex: {e}"))
                })?)
            } else {
                None
            };
            Ok(StrictFeasibility { nonempty, witness, slack: value })
        }
        LpOutcome::Infeasible => Err(LpError::NumericalBreakdown(
            "slack program cannot be infeasible over the simplex".into(),
        )),
        LpOutcome::Unbounded => Err(LpError::NumericalBreakdown(
            "slack program cannot be unbounded".into(),
        )),
    }
}
