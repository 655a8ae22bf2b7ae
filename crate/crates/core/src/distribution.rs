//! Finite-sample distribution of the Lasso under `y ~ N(X beta, sigma^2 I)`.
//!
//! Write `u = b - beta` for the estimation error and `W = X'y - X'X beta ~
//! N(0, sigma^2 X'X)`. On the orthant `O^d` the optimality conditions read
//!
//! ```text
//! W = X'X u + s,   s_j = d_j lambda_j (j in D+-),   |s_j| <= lambda_j, u_j = -beta_j (j in D0)
//! ```
//!
//! With full column rank the free coordinates `x = (u_{D+-}, s_{D0})` are an
//! affine image of `W`, hence Gaussian with mean `-J^{-1} c` and covariance
//! `sigma^2 J^{-1} X'X J^{-T}`, where `J` stacks the columns `(X'X)_{.j}`
//! (`j in D+-`) and `e_j` (`j in D0`). Every event below is a box in `x`.
//! The Jacobian `|det (X'X)_{D+-,D+-}|` of this change of variables is part of
//! the piece densities `h^d`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, LassoError, Result};
use crate::model::{DesignProblem, GaussianModel, SignVector, TuningVector, DEFAULT_ZERO_TOL};
use crate::mvn::GaussianPolytope;
use crate::par::{map_indexed, Execution};
use crate::quadrature::Estimate;
use crate::solver::{coordinate_descent, SolverOptions, DEFAULT_MAX_ITER, DEFAULT_SOLVER_TOL};

/// Largest integration dimension handled by nested quadrature.
pub const QUADRATURE_DIM_LIMIT: usize = 6;
/// Largest `p` for the `3^p`-term CDF sum.
pub const CDF_DIM_LIMIT: usize = 4;
/// Below this, `P(O^d)` is treated as zero when conditioning.
pub const NULL_PROBABILITY: f64 = 1e-12;
/// Share of failed solver runs above which a Monte-Carlo run is rejected.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

/// Accuracy and sampling controls shared by all probability routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub quad_tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub zero_tol: f64,
    pub solver_tol: f64,
    pub execution: Execution,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            quad_tol: 1e-6,
            samples: 100_000,
            seed: 0,
            zero_tol: DEFAULT_ZERO_TOL,
            solver_tol: DEFAULT_SOLVER_TOL,
            execution: Execution::default(),
        }
    }
}

impl Precision {
    fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0) || !(self.zero_tol > 0.0) || !(self.solver_tol > 0.0) {
            return Err(LassoError::InvalidInput("tolerances must be positive".into()));
        }
        if self.samples == 0 {
            return Err(LassoError::InvalidInput("sample count must be at least 1".into()));
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

/// Requested evaluation method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Quadrature,
    MonteCarlo,
}

/// How a reported probability was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    Quadrature,
    QuasiMonteCarlo,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionProbability {
    pub estimate: f64,
    /// Sampling standard error; 0 for quadrature.
    pub std_error: f64,
    pub method: EstimateKind,
    pub n_samples: usize,
    pub seed: u64,
    /// Error bound of the deterministic part.
    pub quad_tol: f64,
}

impl RegionProbability {
    fn quadrature(estimate: Estimate, requested: f64) -> Self {
        Self {
            estimate: estimate.value.clamp(0.0, 1.0),
            std_error: 0.0,
            method: EstimateKind::Quadrature,
            n_samples: 0,
            seed: 0,
            quad_tol: requested.max(estimate.error),
        }
    }
}

/// Whether an event refers to the estimation error `b - beta` or to `b` itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventTarget {
    #[default]
    Error,
    Estimator,
}

/// `{u_j <= z_j on D-, u_j >= z_j on D+, u_j = z_j on D0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthantEvent {
    pub z: Vec<f64>,
    pub d: SignVector,
    pub target: EventTarget,
}

impl OrthantEvent {
    /// Event on the estimation error with `d = sgn(z + beta)`.
    pub fn estimation_error(z: Vec<f64>, beta: &[f64]) -> Result<Self> {
        check_len("beta", z.len(), beta.len())?;
        let shifted: Vec<f64> = z.iter().zip(beta).map(|(a, b)| a + b).collect();
        let d = exact_signs(&shifted, beta);
        Ok(Self {
            z,
            d,
            target: EventTarget::Error,
        })
    }

    /// Event on the estimator with `d = sgn(z)`.
    pub fn estimator(z: Vec<f64>) -> Self {
        let zeros = vec![0.0; z.len()];
        let d = exact_signs(&z, &zeros);
        Self {
            z,
            d,
            target: EventTarget::Estimator,
        }
    }

    /// Thresholds on the estimation error.
    fn error_thresholds(&self, beta: &[f64]) -> Vec<f64> {
        match self.target {
            EventTarget::Error => self.z.clone(),
            EventTarget::Estimator => self.z.iter().zip(beta).map(|(z, b)| z - b).collect(),
        }
    }
}

fn boundary_tol(beta_j: f64) -> f64 {
    1e-12 * beta_j.abs().max(1.0)
}

fn exact_signs(v: &[f64], beta: &[f64]) -> SignVector {
    let d = v
        .iter()
        .zip(beta)
        .map(|(&x, &b)| {
            if x.abs() <= boundary_tol(b) {
                0
            } else if x > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    SignVector::new(d).expect("signs are in {-1, 0, 1}")
}

fn check_inputs(problem: &DesignProblem, model: &GaussianModel, tuning: &TuningVector) -> Result<()> {
    tuning.check_dim(problem.p())?;
    check_len("beta", problem.p(), model.beta().len())
}

fn require_full_rank(problem: &DesignProblem) -> Result<()> {
    if !problem.is_full_column_rank() {
        return Err(LassoError::RankDeficient {
            rank: problem.rank(),
            p: problem.p(),
            suggestion: "use the monte-carlo method",
        });
    }
    Ok(())
}

fn require_quadrature_dim(dim: usize) -> Result<()> {
    if dim > QUADRATURE_DIM_LIMIT {
        return Err(LassoError::DimensionLimit {
            dim,
            limit: QUADRATURE_DIM_LIMIT,
            suggestion: "use the monte-carlo method",
        });
    }
    Ok(())
}

/// Gaussian law of the free coordinates `x = (u_{D+-}, s_{D0})` on `O^d`.
struct PieceLaw {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl PieceLaw {
    fn new(problem: &DesignProblem, model: &GaussianModel, tuning: &TuningVector, d: &SignVector) -> Result<Self> {
        let p = problem.p();
        let g = problem.gram();
        let mut jac = DMatrix::zeros(p, p);
        let mut c = DVector::zeros(p);
        for j in 0..p {
            if d.get(j) == 0 {
                jac[(j, j)] = 1.0;
                c -= g.column(j) * model.beta()[j];
            } else {
                jac.set_column(j, &g.column(j));
                c[j] += d.get(j) as f64 * tuning.get(j);
            }
        }
        let lu = jac.lu();
        let inv = lu
            .try_inverse()
            .ok_or_else(|| LassoError::Internal("singular change of variables".into()))?;
        let mean = -(&inv * c);
        let sigma2 = model.sigma() * model.sigma();
        let mut cov = &inv * g * inv.transpose() * sigma2;
        cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    fn box_probability(&self, lower: Vec<f64>, upper: Vec<f64>, axis_tol: f64) -> Result<Estimate> {
        let chol = self
            .cov
            .clone()
            .cholesky()
            .ok_or_else(|| LassoError::Internal("piece covariance is not positive definite".into()))?;
        let poly = GaussianPolytope::from_triangular(self.mean.iter().copied().collect(), chol.l(), lower, upper);
        Ok(poly.quadrature(axis_tol))
    }
}

/// Bounds of `x` for `b in O^d`, optionally cut at error thresholds.
fn piece_bounds(
    d: &SignVector,
    beta: &[f64],
    tuning: &TuningVector,
    cut: impl Fn(usize) -> (f64, f64),
) -> (Vec<f64>, Vec<f64>) {
    let p = d.len();
    let mut lower = vec![0.0; p];
    let mut upper = vec![0.0; p];
    for j in 0..p {
        let (lo, hi) = match d.get(j) {
            -1 => (f64::NEG_INFINITY, -beta[j]),
            1 => (-beta[j], f64::INFINITY),
            _ => (-tuning.get(j), tuning.get(j)),
        };
        let (cl, ch) = if d.get(j) == 0 { (f64::NEG_INFINITY, f64::INFINITY) } else { cut(j) };
        lower[j] = lo.max(cl);
        upper[j] = hi.min(ch);
    }
    (lower, upper)
}

fn piece_probability(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    d: &SignVector,
    lower: Vec<f64>,
    upper: Vec<f64>,
    axis_tol: f64,
) -> Result<Estimate> {
    if lower.iter().zip(&upper).any(|(l, u)| l > u) {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    PieceLaw::new(problem, model, tuning, d)?.box_probability(lower, upper, axis_tol)
}

/// Draws `X'y` for replicate `index` as `X'mu + sigma U diag(s) xi`, which
/// only needs the rank-`r` factor of `X'X`.
pub(crate) struct CrossProductSampler {
    xtmu: Vec<f64>,
    factor: DMatrix<f64>,
    seed: u64,
}

impl CrossProductSampler {
    pub fn new(problem: &DesignProblem, model: &GaussianModel, seed: u64) -> Result<Self> {
        let xtmu = problem.xt(model.mu())?;
        let mut factor = problem.row_space_basis().clone();
        for (k, s) in problem.singular_values().iter().enumerate() {
            factor.column_mut(k).scale_mut(model.sigma() * s);
        }
        Ok(Self { xtmu, factor, seed })
    }

    pub fn sample(&self, index: usize) -> Vec<f64> {
        let mut rng = replicate_rng(self.seed, index);
        let xi: DVector<f64> =
            DVector::from_iterator(self.factor.ncols(), (0..self.factor.ncols()).map(|_| StandardNormal.sample(&mut rng)));
        let w = &self.factor * xi;
        self.xtmu.iter().zip(w.iter()).map(|(a, b)| a + b).collect()
    }
}

/// Independent stream for replicate `index` under `seed`.
pub(crate) fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Monte-Carlo probability that the Lasso value satisfies `event`.
fn monte_carlo<F>(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    precision: &Precision,
    event: F,
) -> Result<RegionProbability>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    precision.validate()?;
    let sampler = CrossProductSampler::new(problem, model, precision.seed)?;
    let opts = precision.solver_options();
    let outcomes = map_indexed(precision.execution, precision.samples, |i| {
        let xty = sampler.sample(i);
        coordinate_descent(problem, &xty, tuning.as_slice(), &opts)
            .ok()
            .map(|out| {
                let b: Vec<f64> = out
                    .b
                    .into_iter()
                    .map(|v| if v.abs() <= precision.zero_tol { 0.0 } else { v })
                    .collect();
                event(&b)
            })
    });
    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    if failures as f64 > MAX_FAILURE_RATE * precision.samples as f64 {
        return Err(LassoError::SimulationFailures {
            failures,
            replicates: precision.samples,
        });
    }
    let n = precision.samples - failures;
    let hits = outcomes.iter().filter(|o| **o == Some(true)).count();
    Ok(binomial(hits, n, precision.seed))
}

pub(crate) fn binomial(hits: usize, n: usize, seed: u64) -> RegionProbability {
    let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
    RegionProbability {
        estimate: p,
        std_error: if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() },
        method: EstimateKind::MonteCarlo,
        n_samples: n,
        seed,
        quad_tol: 0.0,
    }
}

fn validate_event(model: &GaussianModel, event: &OrthantEvent) -> Result<Vec<f64>> {
    let beta = model.beta();
    check_len("event thresholds", beta.len(), event.z.len())?;
    check_len("event signs", beta.len(), event.d.len())?;
    let z = event.error_thresholds(beta);
    for j in 0..beta.len() {
        let shifted = z[j] + beta[j];
        let consistent = match event.d.get(j) {
            0 => shifted.abs() <= boundary_tol(beta[j]),
            s => shifted * s as f64 > boundary_tol(beta[j]),
        };
        if !consistent {
            return Err(LassoError::InvalidInput(format!(
                "sign d_{} = {} does not match the threshold (need d = sgn(z + beta) for the error, sgn(z) for the estimator)",
                j + 1,
                event.d.get(j)
            )));
        }
    }
    Ok(z)
}

/// Probability of an orthant event.
pub fn prob_orthant_event(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    event: &OrthantEvent,
    method: Method,
    precision: &Precision,
) -> Result<RegionProbability> {
    check_inputs(problem, model, tuning)?;
    precision.validate()?;
    let z = validate_event(model, event)?;
    let beta = model.beta();
    match method {
        Method::Quadrature => {
            require_full_rank(problem)?;
            require_quadrature_dim(problem.p())?;
            let d = &event.d;
            let (lower, upper) = piece_bounds(d, beta, tuning, |j| match d.get(j) {
                -1 => (f64::NEG_INFINITY, z[j]),
                _ => (z[j], f64::INFINITY),
            });
            let axis_tol = precision.quad_tol / problem.p() as f64;
            let est = piece_probability(problem, model, tuning, d, lower, upper, axis_tol)?;
            Ok(RegionProbability::quadrature(est, precision.quad_tol))
        }
        Method::MonteCarlo => {
            let d = event.d.clone();
            monte_carlo(problem, model, tuning, precision, move |b| {
                (0..b.len()).all(|j| {
                    let u = b[j] - beta[j];
                    match d.get(j) {
                        -1 => u <= z[j],
                        1 => u >= z[j],
                        _ => b[j] == 0.0,
                    }
                })
            })
        }
    }
}

/// `P(b in O^d)`.
pub fn prob_orthant(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    d: &SignVector,
    method: Method,
    precision: &Precision,
) -> Result<RegionProbability> {
    check_inputs(problem, model, tuning)?;
    check_len("sign vector", problem.p(), d.len())?;
    precision.validate()?;
    match method {
        Method::Quadrature => {
            require_full_rank(problem)?;
            require_quadrature_dim(problem.p())?;
            let (lower, upper) = piece_bounds(d, model.beta(), tuning, |_| (f64::NEG_INFINITY, f64::INFINITY));
            let axis_tol = precision.quad_tol / problem.p() as f64;
            let est = piece_probability(problem, model, tuning, d, lower, upper, axis_tol)?;
            Ok(RegionProbability::quadrature(est, precision.quad_tol))
        }
        Method::MonteCarlo => {
            let d = d.clone();
            monte_carlo(problem, model, tuning, precision, move |b| d.contains(b))
        }
    }
}

/// `P(b = 0)`: the Gaussian mass of `X'y` in the lambda-box.
///
/// Quadrature works in any rank through the `r`-dimensional law of `X'y`.
pub fn prob_all_zero(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    method: Method,
    precision: &Precision,
) -> Result<RegionProbability> {
    check_inputs(problem, model, tuning)?;
    precision.validate()?;
    match method {
        Method::Quadrature => {
            require_quadrature_dim(problem.rank())?;
            let sampler = CrossProductSampler::new(problem, model, precision.seed)?;
            let upper = tuning.as_slice().to_vec();
            let lower = upper.iter().map(|l| -l).collect();
            let poly = GaussianPolytope::from_factor(sampler.xtmu, sampler.factor, lower, upper);
            let axis_tol = precision.quad_tol / problem.rank().max(1) as f64;
            Ok(RegionProbability::quadrature(poly.quadrature(axis_tol), precision.quad_tol))
        }
        Method::MonteCarlo => {
            monte_carlo(problem, model, tuning, precision, |b| b.iter().all(|&v| v == 0.0))
        }
    }
}

/// The piece `h^d` at error point `z`: the density of `u_{D+-}` jointly with
/// `b in O^d`. Only `z_{D+-}` is read. For `d = 0` this is the atom `P(b = 0)`.
pub fn piece_density(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    d: &SignVector,
    z: &[f64],
    precision: &Precision,
) -> Result<f64> {
    check_inputs(problem, model, tuning)?;
    check_len("sign vector", problem.p(), d.len())?;
    check_len("density point", problem.p(), z.len())?;
    precision.validate()?;
    require_full_rank(problem)?;
    let beta = model.beta();
    let active = d.active();
    let zero = d.d_zero();
    require_quadrature_dim(zero.len())?;
    if active.iter().any(|&j| (z[j] + beta[j]) * d.get(j) as f64 <= 0.0) {
        return Ok(0.0);
    }
    let law = PieceLaw::new(problem, model, tuning, d)?;
    if active.is_empty() {
        let upper = tuning.as_slice().to_vec();
        let lower = upper.iter().map(|l| -l).collect();
        return Ok(law.box_probability(lower, upper, precision.quad_tol / problem.p() as f64)?.value);
    }

    let sub = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |a, b| law.cov[(rows[a], cols[b])]);
    let saa = sub(&active, &active);
    let chol = saa
        .cholesky()
        .ok_or_else(|| LassoError::Internal("marginal covariance is not positive definite".into()))?;
    let dev = DVector::from_iterator(active.len(), active.iter().map(|&j| z[j] - law.mean[j]));
    let solved = chol.solve(&dev);
    let quad_form = dev.dot(&solved);
    let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    let k = active.len() as f64;
    let marginal = (-0.5 * quad_form - 0.5 * log_det - 0.5 * k * (2.0 * std::f64::consts::PI).ln()).exp();
    if zero.is_empty() {
        return Ok(marginal);
    }

    let s0a = sub(&zero, &active);
    let s00 = sub(&zero, &zero);
    let cond_mean: Vec<f64> = (DVector::from_iterator(zero.len(), zero.iter().map(|&j| law.mean[j])) + &s0a * &solved)
        .iter()
        .copied()
        .collect();
    let gain = chol.solve(&s0a.transpose());
    let mut cond_cov = s00 - &s0a * gain;
    cond_cov = (&cond_cov + cond_cov.transpose()) * 0.5;
    let cond_chol = cond_cov
        .cholesky()
        .ok_or_else(|| LassoError::Internal("conditional covariance is not positive definite".into()))?;
    let upper: Vec<f64> = zero.iter().map(|&j| tuning.get(j)).collect();
    let lower = upper.iter().map(|l| -l).collect();
    let poly = GaussianPolytope::from_triangular(cond_mean, cond_chol.l(), lower, upper);
    let inner = poly.quadrature(precision.quad_tol / zero.len() as f64);
    Ok(marginal * inner.value)
}

/// `f^d(z_active) = h^d / P(b in O^d)`, the density of `u_{D+-}` given `b in O^d`.
/// `z_active` lists `u_j` for `j in D+-` in ascending order.
pub fn conditional_density(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    d: &SignVector,
    z_active: &[f64],
    precision: &Precision,
) -> Result<f64> {
    check_inputs(problem, model, tuning)?;
    check_len("sign vector", problem.p(), d.len())?;
    check_len("active coordinates", d.l1_norm(), z_active.len())?;
    let mass = prob_orthant(problem, model, tuning, d, Method::Quadrature, precision)?;
    if mass.estimate < NULL_PROBABILITY {
        return Err(LassoError::NullConditioning {
            probability: mass.estimate,
        });
    }
    let mut z: Vec<f64> = model.beta().iter().map(|b| -b).collect();
    for (&j, &v) in d.active().iter().zip(z_active) {
        z[j] = v;
    }
    Ok(piece_density(problem, model, tuning, d, &z, precision)? / mass.estimate)
}

/// `F(z) = P(u_1 <= z_1, ..., u_p <= z_p)` for the estimation error `u`.
pub fn cdf(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    z: &[f64],
    method: Method,
    precision: &Precision,
) -> Result<RegionProbability> {
    check_inputs(problem, model, tuning)?;
    check_len("cdf point", problem.p(), z.len())?;
    precision.validate()?;
    let beta = model.beta();
    match method {
        Method::Quadrature => {
            require_full_rank(problem)?;
            let p = problem.p();
            if p > CDF_DIM_LIMIT {
                return Err(LassoError::DimensionLimit {
                    dim: p,
                    limit: CDF_DIM_LIMIT,
                    suggestion: "use the empirical CDF from a simulation run",
                });
            }
            let axis_tol = precision.quad_tol / (p as f64 * 3f64.powi(p as i32));
            let mut value = 0.0;
            let mut error = 0.0;
            for d in SignVector::all(p) {
                if (0..p).any(|j| d.get(j) == 0 && -beta[j] > z[j]) {
                    continue;
                }
                let (lower, upper) = piece_bounds(&d, beta, tuning, |j| (f64::NEG_INFINITY, z[j]));
                let est = piece_probability(problem, model, tuning, &d, lower, upper, axis_tol)?;
                value += est.value;
                error += est.error;
            }
            Ok(RegionProbability::quadrature(Estimate { value, error }, precision.quad_tol))
        }
        Method::MonteCarlo => monte_carlo(problem, model, tuning, precision, |b| {
            b.iter().zip(beta).zip(z).all(|((b, beta), z)| b - beta <= *z)
        }),
    }
}

/// Monte-Carlo probability that the Lasso value lies in `region`.
///
/// Sampling only touches the `r`-dimensional law of `X'y`, so the estimate
/// depends on `beta` only through `X beta`.
pub fn prob_region_high<F>(
    problem: &DesignProblem,
    model: &GaussianModel,
    tuning: &TuningVector,
    region: F,
    precision: &Precision,
) -> Result<RegionProbability>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    check_inputs(problem, model, tuning)?;
    monte_carlo(problem, model, tuning, precision, region)
}

/// `P(lower <= N(mean, cov) <= upper)` by randomized quasi-Monte Carlo on the
/// separation-of-variables transform. Singular covariances are handled in
/// their range.
pub fn mvn_box_probability(
    mean: &[f64],
    cov: &DMatrix<f64>,
    lower: &[f64],
    upper: &[f64],
    precision: &Precision,
) -> Result<RegionProbability> {
    let m = mean.len();
    if cov.nrows() != m || cov.ncols() != m {
        return Err(LassoError::DimensionMismatch {
            what: "covariance",
            expected: m,
            found: cov.nrows(),
        });
    }
    check_len("lower bounds", m, lower.len())?;
    check_len("upper bounds", m, upper.len())?;
    precision.validate()?;
    if let Some(j) = (0..m).find(|&j| lower[j] > upper[j]) {
        return Err(LassoError::InvalidInput(format!("lower bound {} exceeds upper bound", j + 1)));
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if min < -1e-10 * top.max(1.0) {
        return Err(LassoError::NotPositiveSemidefinite { min_eigenvalue: min });
    }
    let keep: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > 1e-12 * top).collect();
    let mut factor = DMatrix::zeros(m, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        factor.set_column(c, &(eig.eigenvectors.column(k) * eig.eigenvalues[k].sqrt()));
    }
    let poly = GaussianPolytope::from_factor(mean.to_vec(), factor, lower.to_vec(), upper.to_vec());
    let est = poly.rqmc(precision.quad_tol, precision.samples, precision.seed);
    Ok(RegionProbability {
        estimate: est.value,
        std_error: est.std_error,
        method: EstimateKind::QuasiMonteCarlo,
        n_samples: est.points,
        seed: precision.seed,
        quad_tol: if est.points == 0 { precision.quad_tol } else { 0.0 },
    })
}
