//! Dense linear-programming core: two-phase primal simplex with dual
//! values.
//!
//! Built for restricted master problems of desk-scale size, so the tableau
//! is dense and pricing is Dantzig's rule with a Bland fallback for
//! termination. Duals are read off the final tableau through the unit
//! column that each row starts with (its slack or artificial), which also
//! yields a Farkas certificate when phase one proves infeasibility.

use std::fmt;
use std::fmt::Write as _;

/// Row sense of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Minimize `objective . x` subject to rows `coeffs . x (sense) rhs` and
/// `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    sense: Sense,
    rhs: f64,
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solution values. `x` and `objective` are meaningful at
/// [`LpStatus::Optimal`]; `y` holds one dual value per row (zero-filled
/// otherwise); `farkas` carries the phase-one duals certifying
/// infeasibility.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub farkas: Option<Vec<f64>>,
}

/// Numerical failure: no acceptable pivot even under Bland's rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericalBreakdown {
    pub detail: String,
}

impl fmt::Display for NumericalBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "numerical breakdown: {}", self.detail)
    }
}

impl std::error::Error for NumericalBreakdown {}

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-7;
pub const REPORTING_TOL: f64 = 1e-6;
const PIVOT_TOL: f64 = 1e-11;

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { objective: vec![0.0; num_vars], rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_objective(&mut self, coeffs: Vec<f64>) {
        assert_eq!(coeffs.len(), self.num_vars());
        assert!(coeffs.iter().all(|c| c.is_finite()));
        self.objective = coeffs;
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars(), "row length must equal variable count");
        assert!(coeffs.iter().all(|c| c.is_finite()) && rhs.is_finite());
        self.rows.push(Row { coeffs, sense, rhs });
    }

    /// Plain-text dump in a CPLEX-LP-like layout, for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::from("Minimize\n obj:");
        for (j, c) in self.objective.iter().enumerate() {
            write!(out, " {} x{}", fmt_num(*c), j + 1).unwrap();
            if j + 1 < self.num_vars() {
                out.push_str(" +");
            }
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            write!(out, " r{}:", i + 1).unwrap();
            for (j, c) in row.coeffs.iter().enumerate() {
                write!(out, " {} x{}", fmt_num(*c), j + 1).unwrap();
                if j + 1 < self.num_vars() {
                    out.push_str(" +");
                }
            }
            let sense = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            writeln!(out, " {} {}", sense, fmt_num(row.rhs)).unwrap();
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            writeln!(out, " x{} >= 0", j + 1).unwrap();
        }
        out.push_str("End\n");
        out
    }
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Surplus,
    Artificial,
}

struct Tableau {
    /// Updated constraint matrix, `m x n_cols`.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    kind: Vec<ColKind>,
    /// Phase-two cost per column (structural costs; zero elsewhere).
    cost: Vec<f64>,
    /// Basis: column index per row.
    basis: Vec<usize>,
    /// Column that started as row `r`'s unit column (slack or artificial).
    anchor: Vec<usize>,
    /// Whether row `r` was multiplied by -1 during normalization.
    flipped: Vec<bool>,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut num_cols = n;
        let mut kind = vec![ColKind::Structural; n];
        let mut cost: Vec<f64> = lp.objective.clone();

        let mut a: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        let mut senses = Vec::with_capacity(m);
        for row in &lp.rows {
            let flip = row.rhs < 0.0;
            let sense = match (row.sense, flip) {
                (Sense::Le, true) => Sense::Ge,
                (Sense::Ge, true) => Sense::Le,
                (s, _) => s,
            };
            let coeffs: Vec<f64> =
                row.coeffs.iter().map(|&c| if flip { -c } else { c }).collect();
            a.push(coeffs);
            b.push(if flip { -row.rhs } else { row.rhs });
            flipped.push(flip);
            senses.push(sense);
        }

        // Extra columns: slack (Le), surplus+artificial (Ge), artificial (Eq).
        let mut extra: Vec<(usize, ColKind, f64)> = Vec::new(); // (row, kind, coef)
        let mut anchor = vec![usize::MAX; m];
        let mut basis = vec![usize::MAX; m];
        for (r, sense) in senses.iter().enumerate() {
            match sense {
                Sense::Le => {
                    extra.push((r, ColKind::Slack, 1.0));
                    anchor[r] = num_cols;
                    basis[r] = num_cols;
                    num_cols += 1;
                }
                Sense::Ge => {
                    extra.push((r, ColKind::Surplus, -1.0));
                    num_cols += 1;
                    extra.push((r, ColKind::Artificial, 1.0));
                    anchor[r] = num_cols;
                    basis[r] = num_cols;
                    num_cols += 1;
                }
                Sense::Eq => {
                    extra.push((r, ColKind::Artificial, 1.0));
                    anchor[r] = num_cols;
                    basis[r] = num_cols;
                    num_cols += 1;
                }
            }
        }
        for row in &mut a {
            row.resize(num_cols, 0.0);
        }
        let mut next = n;
        for (r, k, coef) in extra {
            a[r][next] = coef;
            kind.push(k);
            cost.push(0.0);
            next += 1;
        }
        debug_assert_eq!(next, num_cols);

        Tableau { a, b, kind, cost, basis, anchor, flipped, iterations: 0 }
    }

    fn num_cols(&self) -> usize {
        self.kind.len()
    }

    fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// Reduced costs under `costs`, computed from the updated tableau:
    /// `rc_j = c_j - sum_r c_basis[r] * a[r][j]`.
    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let m = self.num_rows();
        let n = self.num_cols();
        let cb: Vec<f64> = (0..m).map(|r| costs[self.basis[r]]).collect();
        (0..n)
            .map(|j| {
                let mut rc = costs[j];
                for r in 0..m {
                    if cb[r] != 0.0 {
                        rc -= cb[r] * self.a[r][j];
                    }
                }
                rc
            })
            .collect()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let m = self.num_rows();
        let n = self.num_cols();
        let p = self.a[row][col];
        for j in 0..n {
            self.a[row][j] /= p;
        }
        self.b[row] /= p;
        for r in 0..m {
            if r == row {
                continue;
            }
            let factor = self.a[r][col];
            if factor.abs() < 1e-300 {
                continue;
            }
            for j in 0..n {
                self.a[r][j] -= factor * self.a[row][j];
            }
            self.b[r] -= factor * self.b[row];
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Runs simplex iterations minimizing `costs` until optimality or
    /// unboundedness. `allowed` filters columns eligible to enter.
    fn optimize(
        &mut self,
        costs: &[f64],
        allowed: impl Fn(&Tableau, usize) -> bool,
    ) -> Result<LpStatus, NumericalBreakdown> {
        let bland_after = 3 * (self.num_rows() + self.num_cols());
        let hard_cap = 1000 * (self.num_rows() + self.num_cols() + 10);
        let mut local_iter = 0usize;
        loop {
            local_iter += 1;
            if local_iter > hard_cap {
                return Err(NumericalBreakdown {
                    detail: format!("no convergence after {hard_cap} iterations"),
                });
            }
            let bland = local_iter > bland_after;
            let rc = self.reduced_costs(costs);
            let entering = if bland {
                (0..self.num_cols())
                    .find(|&j| allowed(self, j) && rc[j] < -OPTIMALITY_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.num_cols() {
                    if allowed(self, j) && rc[j] < -OPTIMALITY_TOL {
                        if best.map_or(true, |(_, b)| rc[j] < b) {
                            best = Some((j, rc[j]));
                        }
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return Ok(LpStatus::Optimal);
            };

            // Ratio test over positive pivot candidates.
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.num_rows() {
                let arc = self.a[r][col];
                if arc > PIVOT_TOL {
                    let ratio = self.b[r] / arc;
                    let better = match leaving {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - FEASIBILITY_TOL
                                || (ratio < lratio + FEASIBILITY_TOL
                                    && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            match leaving {
                None => {
                    // Entering column can grow forever.
                    let any_positive =
                        (0..self.num_rows()).any(|r| self.a[r][col] > 0.0);
                    if any_positive {
                        return Err(NumericalBreakdown {
                            detail: format!(
                                "all pivot candidates in column {col} below {PIVOT_TOL}"
                            ),
                        });
                    }
                    return Ok(LpStatus::Unbounded);
                }
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }

    /// Duals via the anchor unit columns: `y_r = c_B . (B^-1 e_r)`, with
    /// the sign restored for rows that were normalized by negation.
    fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let m = self.num_rows();
        let cb: Vec<f64> = (0..m).map(|r| costs[self.basis[r]]).collect();
        (0..m)
            .map(|r| {
                let col = self.anchor[r];
                let mut y = 0.0;
                for s in 0..m {
                    if cb[s] != 0.0 {
                        y += cb[s] * self.a[s][col];
                    }
                }
                if self.flipped[r] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}

/// Solves the program with two-phase primal simplex. Deterministic for a
/// fixed input.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, NumericalBreakdown> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut tableau = Tableau::build(lp);

    // Phase one: minimize the artificial sum.
    let phase1_cost: Vec<f64> = tableau
        .kind
        .iter()
        .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
        .collect();
    let has_artificials = tableau.kind.iter().any(|k| *k == ColKind::Artificial);
    if has_artificials {
        let status = tableau.optimize(&phase1_cost, |_, _| true)?;
        debug_assert_eq!(status, LpStatus::Optimal, "phase one cannot be unbounded");
        let infeasibility: f64 = (0..m)
            .filter(|&r| tableau.kind[tableau.basis[r]] == ColKind::Artificial)
            .map(|r| tableau.b[r])
            .sum();
        if infeasibility > OPTIMALITY_TOL {
            // Phase-one duals certify infeasibility: every current column
            // prices to a nonpositive inner product against them while the
            // right-hand side prices positive. A new column can help only
            // if its inner product is positive.
            let farkas = tableau.duals(&phase1_cost);
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                y: vec![0.0; m],
                objective: f64::NAN,
                iterations: tableau.iterations,
                farkas: Some(farkas),
            });
        }
        // Drive remaining degenerate artificials out of the basis where
        // possible; a row with no eligible pivot is redundant and harmless.
        for r in 0..m {
            if tableau.kind[tableau.basis[r]] == ColKind::Artificial {
                if let Some(col) = (0..tableau.num_cols()).find(|&j| {
                    tableau.kind[j] != ColKind::Artificial && tableau.a[r][j].abs() > 1e-7
                }) {
                    tableau.pivot(r, col);
                }
            }
        }
    }

    // Phase two: minimize the real objective; artificials may not re-enter.
    let cost = tableau.cost.clone();
    let status =
        tableau.optimize(&cost, |t, j| t.kind[j] != ColKind::Artificial)?;
    if status == LpStatus::Unbounded {
        return Ok(LpSolution {
            status,
            x: vec![0.0; n],
            y: vec![0.0; m],
            objective: f64::NEG_INFINITY,
            iterations: tableau.iterations,
            farkas: None,
        });
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if tableau.basis[r] < n {
            x[tableau.basis[r]] = tableau.b[r];
        }
    }
    let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let y = tableau.duals(&cost);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        y,
        objective,
        iterations: tableau.iterations,
        farkas: None,
    })
}
