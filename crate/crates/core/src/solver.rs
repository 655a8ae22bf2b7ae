//! Weighted Lasso solver.
//!
//! The objective carries a factor two on the penalty:
//!
//! ```text
//! L(b) = ||y - X b||^2 + 2 * sum_j lambda_j |b_j|
//! ```
//!
//! so the exact coordinate minimizer soft-thresholds at `lambda_j`, then
//! divides by `(X'X)_jj`. Most libraries scale the penalty differently; a
//! `lambda` taken from them must be converted before use here.
//!
//! Optimality is certified directly: with `g = X'y - X'X b`, `b` minimizes
//! `L` iff `g_j = sgn(b_j) lambda_j` wherever `b_j != 0` and
//! `|g_j| <= lambda_j` elsewhere.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, LassoError, Result};
use crate::linalg::lstsq;
use crate::lp::{find_feasible_point, Constraint, Relation, FEASIBILITY_TOL};
use crate::model::{DesignProblem, TuningVector, DEFAULT_ZERO_TOL};

pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200_000;

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Target for the KKT residual (absolute).
    pub tol: f64,
    /// Maximum number of full coordinate sweeps.
    pub max_iter: usize,
    /// Coefficients with `|b_j| <= zero_tol` are treated as zero.
    pub zero_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_SOLVER_TOL,
            max_iter: DEFAULT_MAX_ITER,
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LassoSolution {
    pub b: Vec<f64>,
    pub fit: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    /// Indices with `|b_j| > zero_tol`, ascending.
    pub active_model: Vec<usize>,
    pub sweeps: usize,
}

/// Outcome of checking the optimality conditions at a candidate point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub satisfied: bool,
    pub max_violation: f64,
    /// Index attaining `max_violation` (only when nonzero).
    pub worst_index: Option<usize>,
}

/// Position of `g_j = (X'y - X'X b)_j` relative to `[-lambda_j, lambda_j]` at a solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquicorrelationStatus {
    /// `g_j = +lambda_j > 0`: every solution has `b_j >= 0`.
    AtUpper,
    /// `g_j = -lambda_j < 0`: every solution has `b_j <= 0`.
    AtLower,
    /// `|g_j| < lambda_j`: every solution has `b_j = 0`.
    Interior,
    /// `lambda_j = 0`, so `g_j = 0` and the sign of `b_j` is unrestricted.
    Unpenalized,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionSetDescription {
    /// `X b`, shared by every solution.
    pub fit: Vec<f64>,
    pub anchor: LassoSolution,
    pub equicorrelation: Vec<EquicorrelationStatus>,
    pub is_unique_at_y: bool,
}

impl SolutionSetDescription {
    /// Indices not classified as interior (the equicorrelation set).
    pub fn equicorrelation_set(&self) -> Vec<usize> {
        self.equicorrelation
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != EquicorrelationStatus::Interior)
            .map(|(j, _)| j)
            .collect()
    }
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// `L(b)` for the factor-two penalty convention.
pub fn objective(problem: &DesignProblem, y: &[f64], tuning: &TuningVector, b: &[f64]) -> Result<f64> {
    let fit = problem.fit(b)?;
    check_len("response vector", problem.n(), y.len())?;
    tuning.check_dim(problem.p())?;
    let rss: f64 = y.iter().zip(&fit).map(|(a, f)| (a - f).powi(2)).sum();
    let pen: f64 = tuning.as_slice().iter().zip(b).map(|(l, v)| l * v.abs()).sum();
    Ok(rss + 2.0 * pen)
}

pub(crate) fn kkt_violation(
    g: &[f64],
    b: &[f64],
    lambda: &[f64],
    zero_tol: f64,
) -> (f64, Option<usize>) {
    let mut worst = 0.0;
    let mut index = None;
    for j in 0..b.len() {
        let v = if b[j].abs() > zero_tol {
            (g[j] - b[j].signum() * lambda[j]).abs()
        } else {
            (g[j].abs() - lambda[j]).max(0.0)
        };
        if v > worst {
            worst = v;
            index = Some(j);
        }
    }
    (worst, index)
}

fn gradient(gram: &DMatrix<f64>, xty: &[f64], b: &[f64]) -> Vec<f64> {
    let gb = gram * DVector::from_column_slice(b);
    xty.iter().zip(gb.iter()).map(|(a, c)| a - c).collect()
}

const POLISH_EVERY: usize = 32;

/// Solves the stationarity equations exactly on the current support with the
/// current signs held fixed. Returns `None` when a sign would flip.
fn polish(
    gram: &DMatrix<f64>,
    xty: &[f64],
    g: &[f64],
    b: &[f64],
    lambda: &[f64],
    zero_col: &[bool],
    zero_tol: f64,
) -> Option<(Vec<f64>, f64)> {
    let support: Vec<usize> = (0..b.len())
        .filter(|&j| !zero_col[j] && (b[j].abs() > zero_tol || lambda[j] == 0.0))
        .collect();
    if support.is_empty() {
        return None;
    }
    let sub = gram.select_rows(&support).select_columns(&support);
    let rhs = DVector::from_iterator(
        support.len(),
        support.iter().map(|&j| g[j] - b[j].signum() * lambda[j]),
    );
    let (delta, _) = lstsq(&sub, &rhs);
    let mut out = b.to_vec();
    for (k, &j) in support.iter().enumerate() {
        let v = b[j] + delta[k];
        if lambda[j] > 0.0 && v * b[j] <= 0.0 {
            return None;
        }
        out[j] = v;
    }
    let g = gradient(gram, xty, &out);
    let (residual, _) = kkt_violation(&g, &out, lambda, zero_tol);
    Some((out, residual))
}

pub(crate) struct CdOutput {
    pub b: Vec<f64>,
    pub residual: f64,
    pub sweeps: usize,
}

/// Cyclic coordinate descent from zero in index order. Depends on the data
/// only through `X'X` and `X'y`.
pub(crate) fn coordinate_descent(
    problem: &DesignProblem,
    xty: &[f64],
    lambda: &[f64],
    opts: &SolverOptions,
) -> Result<CdOutput> {
    let gram = problem.gram();
    let p = problem.p();
    let zero_col: Vec<bool> = (0..p).map(|j| problem.is_zero_column(j)).collect();
    let mut b = vec![0.0; p];
    let mut g = xty.to_vec();
    let mut best = (f64::INFINITY, b.clone());

    for sweep in 1..=opts.max_iter {
        for j in 0..p {
            if zero_col[j] {
                // Unidentified (lambda_j = 0) or forced to zero (lambda_j > 0).
                b[j] = 0.0;
                continue;
            }
            let gjj = gram[(j, j)];
            let rho = g[j] + gjj * b[j];
            let updated = soft_threshold(rho, lambda[j]) / gjj;
            let delta = updated - b[j];
            if delta != 0.0 {
                b[j] = updated;
                for k in 0..p {
                    g[k] -= gram[(k, j)] * delta;
                }
            }
        }
        g = gradient(gram, xty, &b);
        let (residual, _) = kkt_violation(&g, &b, lambda, opts.zero_tol);
        if residual <= opts.tol {
            return Ok(CdOutput {
                b,
                residual,
                sweeps: sweep,
            });
        }
        if residual < best.0 {
            best = (residual, b.clone());
        }
        if sweep % POLISH_EVERY == 0 {
            if let Some((polished, residual)) = polish(gram, xty, &g, &b, lambda, &zero_col, opts.zero_tol) {
                if residual <= opts.tol {
                    return Ok(CdOutput {
                        b: polished,
                        residual,
                        sweeps: sweep,
                    });
                }
            }
        }
    }
    Err(LassoError::Convergence {
        iterations: opts.max_iter,
        tol: opts.tol,
        residual: best.0,
        best: best.1,
    })
}

/// Solves the weighted Lasso at response `y`.
pub fn solve(
    problem: &DesignProblem,
    y: &[f64],
    tuning: &TuningVector,
    tol: f64,
    max_iter: usize,
) -> Result<LassoSolution> {
    let opts = SolverOptions {
        tol,
        max_iter,
        ..SolverOptions::default()
    };
    solve_with(problem, y, tuning, &opts)
}

pub fn solve_with(
    problem: &DesignProblem,
    y: &[f64],
    tuning: &TuningVector,
    opts: &SolverOptions,
) -> Result<LassoSolution> {
    if !(opts.tol > 0.0) {
        return Err(LassoError::InvalidInput(format!(
            "solver tolerance must be positive, got {}",
            opts.tol
        )));
    }
    tuning.check_dim(problem.p())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LassoError::InvalidInput("response has non-finite entries".into()));
    }
    let xty = problem.xt(y)?;
    let out = coordinate_descent(problem, &xty, tuning.as_slice(), opts)?;
    let fit = problem.fit(&out.b)?;
    let objective = objective(problem, y, tuning, &out.b)?;
    let active_model = (0..problem.p())
        .filter(|&j| out.b[j].abs() > opts.zero_tol)
        .collect();
    Ok(LassoSolution {
        b: out.b,
        fit,
        objective,
        kkt_residual: out.residual,
        active_model,
        sweeps: out.sweeps,
    })
}

/// Checks the optimality conditions for `b` at `y` with absolute tolerance `tol`.
pub fn is_solution(
    problem: &DesignProblem,
    y: &[f64],
    tuning: &TuningVector,
    b: &[f64],
    tol: f64,
) -> Result<KktReport> {
    let xty = problem.xt(y)?;
    is_solution_xty(problem, &xty, tuning, b, tol)
}

/// As [`is_solution`] with the data given as `X'y`.
pub fn is_solution_xty(
    problem: &DesignProblem,
    xty: &[f64],
    tuning: &TuningVector,
    b: &[f64],
    tol: f64,
) -> Result<KktReport> {
    check_len("coefficient vector", problem.p(), b.len())?;
    check_len("X'y", problem.p(), xty.len())?;
    tuning.check_dim(problem.p())?;
    let g = gradient(problem.gram(), xty, b);
    let (max_violation, worst_index) = kkt_violation(&g, b, tuning.as_slice(), DEFAULT_ZERO_TOL);
    Ok(KktReport {
        satisfied: max_violation <= tol,
        max_violation,
        worst_index,
    })
}

/// Solves at `y` and characterizes the whole solution set.
pub fn describe_solution_set(
    problem: &DesignProblem,
    y: &[f64],
    tuning: &TuningVector,
    tol: f64,
) -> Result<SolutionSetDescription> {
    let opts = SolverOptions::with_tol(tol);
    let anchor = solve_with(problem, y, tuning, &opts)?;
    let xty = problem.xt(y)?;
    describe_from_anchor(problem, &xty, tuning, anchor, &opts)
}

pub(crate) fn describe_from_anchor(
    problem: &DesignProblem,
    xty: &[f64],
    tuning: &TuningVector,
    anchor: LassoSolution,
    opts: &SolverOptions,
) -> Result<SolutionSetDescription> {
    let g = gradient(problem.gram(), xty, &anchor.b);
    let class_tol = (100.0 * opts.tol).max(1e-12);
    let equicorrelation: Vec<EquicorrelationStatus> = (0..problem.p())
        .map(|j| {
            let lam = tuning.get(j);
            if lam == 0.0 {
                EquicorrelationStatus::Unpenalized
            } else if (g[j] - lam).abs() <= class_tol * lam.max(1.0) {
                EquicorrelationStatus::AtUpper
            } else if (g[j] + lam).abs() <= class_tol * lam.max(1.0) {
                EquicorrelationStatus::AtLower
            } else {
                EquicorrelationStatus::Interior
            }
        })
        .collect();
    let is_unique_at_y = unique_given_classification(problem, &anchor.b, &equicorrelation, opts.zero_tol)?;
    Ok(SolutionSetDescription {
        fit: anchor.fit.clone(),
        anchor,
        equicorrelation,
        is_unique_at_y,
    })
}

/// The solution set is `{b : X_E b_E = fit, b_{E^c} = 0, sign constraints on E}`;
/// it is a single point iff its tangent cone at the anchor is trivial.
fn unique_given_classification(
    problem: &DesignProblem,
    anchor: &[f64],
    status: &[EquicorrelationStatus],
    zero_tol: f64,
) -> Result<bool> {
    let eq_set: Vec<usize> = (0..status.len())
        .filter(|&j| status[j] != EquicorrelationStatus::Interior)
        .collect();
    if eq_set.is_empty() {
        return Ok(true);
    }
    let sub = problem.select_columns(&eq_set)?;
    if sub.rank() == eq_set.len() {
        return Ok(true);
    }
    let kernel = sub.null_space_basis();
    let k = kernel.ncols();

    // Penalized equicorrelated indices sitting at zero restrict the feasible directions.
    let pinned: Vec<(usize, f64)> = eq_set
        .iter()
        .enumerate()
        .filter_map(|(pos, &j)| {
            let sign = match status[j] {
                EquicorrelationStatus::AtUpper => 1.0,
                EquicorrelationStatus::AtLower => -1.0,
                _ => return None,
            };
            (anchor[j].abs() <= zero_tol).then_some((pos, sign))
        })
        .collect();
    if pinned.is_empty() {
        return Ok(false);
    }
    let rows: Vec<usize> = pinned.iter().map(|&(pos, _)| pos).collect();
    let restricted = kernel.select_rows(rows.iter());
    if crate::linalg::numerical_rank(&restricted) < k {
        return Ok(false);
    }

    let mut constraints = Vec::with_capacity(pinned.len() + 1);
    let mut normalization = vec![0.0; k];
    for (row, &(_, sign)) in pinned.iter().enumerate() {
        let coeffs: Vec<f64> = (0..k).map(|c| sign * restricted[(row, c)]).collect();
        for (acc, v) in normalization.iter_mut().zip(&coeffs) {
            *acc += v;
        }
        constraints.push(Constraint::new(coeffs, Relation::Ge, 0.0));
    }
    constraints.push(Constraint::new(normalization, Relation::Eq, 1.0));
    let direction = find_feasible_point(k, &constraints, FEASIBILITY_TOL)?;
    Ok(direction.is_none())
}
