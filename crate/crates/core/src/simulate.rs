//! Monte-Carlo experiments: draw `y = X beta + eps`, solve, and tabulate.

use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distribution::{binomial, replicate_rng, RegionProbability};
use crate::error::{LassoError, Result};
use crate::model::{sign_partition, DesignProblem, GaussianModel, SignVector, TuningVector, DEFAULT_ZERO_TOL};
use crate::par::{map_indexed, Execution};
use crate::solver::{describe_from_anchor, solve_with, SolverOptions, DEFAULT_MAX_ITER, DEFAULT_SOLVER_TOL};

pub use crate::distribution::MAX_FAILURE_RATE;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_rep: usize,
    pub seed: u64,
    pub zero_tol: f64,
    pub solver_tol: f64,
    /// Points per axis of the marginal empirical CDFs.
    pub ecdf_points: usize,
    pub execution: Execution,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_rep: 10_000,
            seed: 0,
            zero_tol: DEFAULT_ZERO_TOL,
            solver_tol: DEFAULT_SOLVER_TOL,
            ecdf_points: 21,
            execution: Execution::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rep == 0 {
            return Err(LassoError::InvalidInput("n_rep must be at least 1".into()));
        }
        if !(self.zero_tol > 0.0 && self.solver_tol > 0.0) {
            return Err(LassoError::InvalidInput("tolerances must be positive".into()));
        }
        if self.ecdf_points < 2 {
            return Err(LassoError::InvalidInput("ecdf_points must be at least 2".into()));
        }
        Ok(())
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver_tol,
            max_iter: DEFAULT_MAX_ITER,
            zero_tol: self.zero_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternCount {
    pub signs: SignVector,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportCount {
    pub support: Vec<usize>,
    pub count: usize,
}

/// Empirical marginal CDF of one coordinate of the Lasso estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalEcdf {
    pub index: usize,
    pub z: Vec<f64>,
    pub value: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub n_rep: usize,
    pub failures: usize,
    pub sign_pattern_freq: Vec<PatternCount>,
    pub support_freq: Vec<SupportCount>,
    pub ecdf_grid: Vec<MarginalEcdf>,
    pub nonunique_count: usize,
}

impl EmpiricalSummary {
    /// Successful replicates.
    pub fn completed(&self) -> usize {
        self.n_rep - self.failures
    }

    pub fn pattern_count(&self, signs: &[i8]) -> usize {
        self.sign_pattern_freq
            .iter()
            .find(|c| c.signs.as_slice() == signs)
            .map_or(0, |c| c.count)
    }

    /// Replicates whose support contains `j`.
    pub fn selection_count(&self, j: usize) -> usize {
        self.support_freq
            .iter()
            .filter(|c| c.support.contains(&j))
            .map(|c| c.count)
            .sum()
    }
}

struct Replicate {
    b: Vec<f64>,
    signs: SignVector,
    unique: bool,
}

fn run_replicates(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    config: &SimulationConfig,
    classify: bool,
) -> Result<Vec<Option<Replicate>>> {
    config.validate()?;
    tuning.check_dim(problem.p())?;
    let opts = config.solver_options();
    let n = problem.n();
    let outcomes = map_indexed(config.execution, config.n_rep, |i| {
        let mut rng = replicate_rng(config.seed, i);
        let y: Vec<f64> = model
            .mu()
            .iter()
            .map(|m| {
                let e: f64 = StandardNormal.sample(&mut rng);
                m + model.sigma() * e
            })
            .collect();
        debug_assert_eq!(y.len(), n);
        let mut anchor = solve_with(problem, &y, tuning, &opts).ok()?;
        for v in anchor.b.iter_mut() {
            if v.abs() <= config.zero_tol {
                *v = 0.0;
            }
        }
        let signs = sign_partition(&anchor.b, config.zero_tol);
        let b = anchor.b.clone();
        let unique = if classify {
            let xty = problem.xt(&y).ok()?;
            describe_from_anchor(problem, &xty, tuning, anchor, &opts)
                .ok()?
                .is_unique_at_y
        } else {
            true
        };
        Some(Replicate { b, signs, unique })
    });
    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    if failures as f64 > MAX_FAILURE_RATE * config.n_rep as f64 {
        return Err(LassoError::SimulationFailures {
            failures,
            replicates: config.n_rep,
        });
    }
    Ok(outcomes)
}

/// Simulates `config.n_rep` responses and tabulates the Lasso estimates.
pub fn run_simulation(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    config: &SimulationConfig,
) -> Result<EmpiricalSummary> {
    let outcomes = run_replicates(problem, model, tuning, config, true)?;
    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    let done: Vec<&Replicate> = outcomes.iter().flatten().collect();

    let mut patterns: BTreeMap<SignVector, usize> = BTreeMap::new();
    let mut supports: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut nonunique_count = 0;
    for r in &done {
        *patterns.entry(r.signs.clone()).or_default() += 1;
        *supports.entry(r.signs.active()).or_default() += 1;
        if !r.unique {
            nonunique_count += 1;
        }
    }
    let ecdf_grid = (0..problem.p())
        .map(|j| {
            let values: Vec<f64> = done.iter().map(|r| r.b[j]).collect();
            marginal_ecdf(j, values, config.ecdf_points, model.sigma())
        })
        .collect();
    Ok(EmpiricalSummary {
        n_rep: config.n_rep,
        failures,
        sign_pattern_freq: patterns
            .into_iter()
            .map(|(signs, count)| PatternCount { signs, count })
            .collect(),
        support_freq: supports
            .into_iter()
            .map(|(support, count)| SupportCount { support, count })
            .collect(),
        ecdf_grid,
        nonunique_count,
    })
}

/// Grid of `points` values spanning the empirical mean `+- 4` empirical
/// standard deviations (`+- 4 sigma` when the sample is degenerate).
fn marginal_ecdf(index: usize, mut values: Vec<f64>, points: usize, sigma: f64) -> MarginalEcdf {
    values.sort_by(f64::total_cmp);
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let spread = if var > 0.0 { var.sqrt() } else { sigma };
    let (lo, hi) = (mean - 4.0 * spread, mean + 4.0 * spread);
    let step = (hi - lo) / (points - 1) as f64;
    let z: Vec<f64> = (0..points).map(|k| lo + step * k as f64).collect();
    let value = z
        .iter()
        .map(|&t| values.partition_point(|&v| v <= t) as f64 / n)
        .collect();
    MarginalEcdf { index, z, value }
}

/// The Lasso estimates of every successful replicate, in replicate order.
pub fn simulate_replicates(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    config: &SimulationConfig,
) -> Result<Vec<Vec<f64>>> {
    Ok(run_replicates(problem, model, tuning, config, false)?
        .into_iter()
        .flatten()
        .map(|r| r.b)
        .collect())
}

/// Fraction of responses at which the Lasso solution set is not a singleton.
pub fn estimate_nonuniqueness_probability(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    config: &SimulationConfig,
) -> Result<RegionProbability> {
    let outcomes = run_replicates(problem, model, tuning, config, true)?;
    let done: Vec<&Replicate> = outcomes.iter().flatten().collect();
    let hits = done.iter().filter(|r| !r.unique).count();
    Ok(binomial(hits, done.len(), config.seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub analytic: RegionProbability,
    pub empirical: RegionProbability,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Agreement within `3 sqrt(se1^2 + se2^2) + quad_tol1 + quad_tol2`.
pub fn compare_analytic_empirical(analytic: &RegionProbability, empirical: &RegionProbability) -> ComparisonReport {
    let discrepancy = (analytic.estimate - empirical.estimate).abs();
    let tolerance = 3.0 * analytic.std_error.hypot(empirical.std_error) + analytic.quad_tol + empirical.quad_tol;
    ComparisonReport {
        analytic: *analytic,
        empirical: *empirical,
        discrepancy,
        tolerance,
        pass: discrepancy <= tolerance,
    }
}
