//! Feasibility of small dense linear systems with free variables, via a
//! phase-one simplex on an explicit tableau. Bland's rule keeps it from
//! cycling on the degenerate vertices that box faces produce.

use nalgebra::DMatrix;

use crate::error::{LassoError, Result};
use crate::linalg::condition_estimate;

/// Absolute tolerance on constraint violation used by the face tests.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Maximum violation of `constraints` at `x`.
pub fn max_violation(constraints: &[Constraint], x: &[f64]) -> f64 {
    constraints
        .iter()
        .map(|c| c.violation(x))
        .fold(0.0, f64::max)
}

/// Returns a point `x in R^num_vars` satisfying every constraint within `tol`,
/// or `None` when the system is infeasible.
pub fn find_feasible_point(
    num_vars: usize,
    constraints: &[Constraint],
    tol: f64,
) -> Result<Option<Vec<f64>>> {
    if constraints.is_empty() {
        return Ok(Some(vec![0.0; num_vars]));
    }
    if let Some(c) = constraints.iter().find(|c| c.coeffs.len() != num_vars) {
        return Err(LassoError::Internal(format!(
            "constraint has {} coefficients, expected {num_vars}",
            c.coeffs.len()
        )));
    }

    let mut tableau = Tableau::phase_one(num_vars, constraints);
    let outcome = tableau.run();
    let objective = tableau.phase_one_objective();
    if outcome == PivotOutcome::IterationLimit {
        return Err(lp_error("pivot limit reached", num_vars, constraints));
    }
    if objective > tol {
        return Ok(None);
    }

    let x = tableau.primal(num_vars);
    let violation = max_violation(constraints, &x);
    if violation > 10.0 * tol {
        return Err(lp_error(
            &format!("phase one reported feasibility but recovered point violates constraints by {violation:e}"),
            num_vars,
            constraints,
        ));
    }
    Ok(Some(x))
}

fn lp_error(message: &str, num_vars: usize, constraints: &[Constraint]) -> LassoError {
    let flat: Vec<f64> = constraints.iter().flat_map(|c| c.coeffs.clone()).collect();
    let a = DMatrix::from_row_slice(constraints.len(), num_vars, &flat);
    LassoError::Lp {
        message: message.to_string(),
        condition: condition_estimate(&a),
    }
}

#[derive(Debug, PartialEq, Eq)]
enum PivotOutcome {
    Optimal,
    IterationLimit,
}

/// Standard-form tableau `[A | b]` with reduced-cost row last.
///
/// Column layout: `x+` (n), `x-` (n), one slack per inequality, one
/// artificial per row.
struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    artificial_start: usize,
}

impl Tableau {
    fn phase_one(num_vars: usize, constraints: &[Constraint]) -> Self {
        let m = constraints.len();
        let slacks = constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let artificial_start = 2 * num_vars + slacks;
        let cols = artificial_start + m;

        let mut rows = Vec::with_capacity(m + 1);
        let mut basis = Vec::with_capacity(m);
        let mut slack_col = 2 * num_vars;
        for (i, c) in constraints.iter().enumerate() {
            let mut row = vec![0.0; cols + 1];
            for (k, &a) in c.coeffs.iter().enumerate() {
                row[k] = a;
                row[num_vars + k] = -a;
            }
            match c.relation {
                Relation::Le => {
                    row[slack_col] = 1.0;
                    slack_col += 1;
                }
                Relation::Ge => {
                    row[slack_col] = -1.0;
                    slack_col += 1;
                }
                Relation::Eq => {}
            }
            row[cols] = c.rhs;
            if c.rhs < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            row[artificial_start + i] = 1.0;
            basis.push(artificial_start + i);
            rows.push(row);
        }

        // Phase-one costs: minimize the sum of artificials, priced out against the basis.
        let mut cost = vec![0.0; cols + 1];
        for row in &rows {
            for (k, v) in row.iter().enumerate() {
                if k < artificial_start || k == cols {
                    cost[k] -= v;
                }
            }
        }
        rows.push(cost);

        Self {
            rows,
            basis,
            cols,
            artificial_start,
        }
    }

    fn run(&mut self) -> PivotOutcome {
        let m = self.basis.len();
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index column with negative reduced cost.
            let Some(entering) = (0..self.cols).find(|&k| self.rows[m][k] < -PIVOT_TOL) else {
                return PivotOutcome::Optimal;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.rows[i][entering];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][self.cols] / a;
                    let better = match leaving {
                        None => true,
                        Some((li, best)) => {
                            ratio < best - 1e-15
                                || ((ratio - best).abs() <= 1e-15 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            // Phase one is bounded below by zero, so a pivot row always exists.
            let Some((row, _)) = leaving else {
                return PivotOutcome::Optimal;
            };
            self.pivot(row, entering);
        }
        PivotOutcome::IterationLimit
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        self.rows[row].iter_mut().for_each(|v| *v *= inv);
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, p) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    fn phase_one_objective(&self) -> f64 {
        let m = self.basis.len();
        // The cost row holds minus the objective in its last entry.
        (-self.rows[m][self.cols]).max(0.0)
    }

    fn primal(&self, num_vars: usize) -> Vec<f64> {
        let mut values = vec![0.0; self.artificial_start];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.artificial_start {
                values[b] = self.rows[i][self.cols];
            }
        }
        (0..num_vars)
            .map(|k| values[k] - values[num_vars + k])
            .collect()
    }
}
