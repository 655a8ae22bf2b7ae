//! Regression model objects: the design with its cached decompositions,
//! tuning weights, sign partitions and the Gaussian error model.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, LassoError, Result};
use crate::linalg::{full_right_svd, rank_from_singular_values};

/// Default threshold below which a computed coefficient counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// Regressor matrix `X` (n x p) with its Gram matrix, rank and orthonormal
/// bases of the row space `col(X')` and of `ker(X)`.
///
/// Immutable after construction; share it freely across threads.
#[derive(Clone, Debug)]
pub struct DesignProblem {
    x: DMatrix<f64>,
    gram: DMatrix<f64>,
    rank: usize,
    singular_values: Vec<f64>,
    row_space_basis: DMatrix<f64>,
    null_space_basis: DMatrix<f64>,
}

impl DesignProblem {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return Err(LassoError::InvalidInput(format!(
                "design matrix must be non-empty, got {n}x{p}"
            )));
        }
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Err(LassoError::InvalidInput(format!(
                "design matrix entry {} (row {}, column {}) is not finite",
                bad,
                bad % n + 1,
                bad / n + 1
            )));
        }

        let raw = x.tr_mul(&x);
        let gram = (&raw + raw.transpose()) * 0.5;

        let (values, v) = full_right_svd(&x);
        let rank = rank_from_singular_values(&values, n, p);
        let row_space_basis = v.columns(0, rank).into_owned();
        let null_space_basis = v.columns(rank, p - rank).into_owned();
        let singular_values = values[..rank].to_vec();

        Ok(Self {
            x,
            gram,
            rank,
            singular_values,
            row_space_basis,
            null_space_basis,
        })
    }

    /// Builds a design from row-major observations.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(LassoError::InvalidInput(format!(
                "row {} has {} entries, expected {p}",
                bad + 1,
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, p, &flat))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_column_rank(&self) -> bool {
        self.rank == self.p()
    }

    /// Nonzero singular values of `X`, descending; paired with the columns of
    /// [`row_space_basis`](Self::row_space_basis).
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// `p x r` matrix with orthonormal columns spanning `col(X')`.
    pub fn row_space_basis(&self) -> &DMatrix<f64> {
        &self.row_space_basis
    }

    /// `p x (p - r)` matrix with orthonormal columns spanning `ker(X)`.
    pub fn null_space_basis(&self) -> &DMatrix<f64> {
        &self.null_space_basis
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.x.column(j).norm()
    }

    /// True when column `j` is numerically zero relative to the largest singular value.
    pub fn is_zero_column(&self, j: usize) -> bool {
        let scale = self.singular_values.first().copied().unwrap_or(0.0);
        self.column_norm(j) <= self.n().max(self.p()) as f64 * scale * 1e-12
    }

    /// `X b`.
    pub fn fit(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("coefficient vector", self.p(), b.len())?;
        Ok((&self.x * DVector::from_column_slice(b)).as_slice().to_vec())
    }

    /// `X' y`.
    pub fn xt(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("response vector", self.n(), y.len())?;
        Ok(self.x.tr_mul(&DVector::from_column_slice(y)).as_slice().to_vec())
    }

    /// `X'X b`.
    pub fn gram_times(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("coefficient vector", self.p(), b.len())?;
        Ok((&self.gram * DVector::from_column_slice(b)).as_slice().to_vec())
    }

    /// Restricts the design to the given columns.
    pub fn select_columns(&self, cols: &[usize]) -> Result<DesignProblem> {
        DesignProblem::new(self.x.select_columns(cols.iter()))
    }
}

/// Per-coordinate penalty weights `lambda_j >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TuningVector {
    lambda: Vec<f64>,
}

impl TuningVector {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(LassoError::InvalidInput("tuning vector is empty".into()));
        }
        if let Some(j) = lambda.iter().position(|l| !l.is_finite() || *l < 0.0) {
            return Err(LassoError::InvalidInput(format!(
                "tuning parameter {} = {} must be finite and non-negative",
                j + 1,
                lambda[j]
            )));
        }
        Ok(Self { lambda })
    }

    pub fn uniform(p: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; p])
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambda
    }

    pub fn get(&self, j: usize) -> f64 {
        self.lambda[j]
    }

    /// Indices of unpenalized coefficients.
    pub fn m0(&self) -> Vec<usize> {
        (0..self.lambda.len())
            .filter(|&j| self.lambda[j] == 0.0)
            .collect()
    }

    pub fn is_penalized(&self, j: usize) -> bool {
        self.lambda[j] > 0.0
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.lambda.iter().map(|l| l * factor).collect())
    }

    pub(crate) fn check_dim(&self, p: usize) -> Result<()> {
        check_len("tuning vector", p, self.lambda.len())
    }
}

impl TryFrom<Vec<f64>> for TuningVector {
    type Error = LassoError;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<TuningVector> for Vec<f64> {
    fn from(t: TuningVector) -> Self {
        t.lambda
    }
}

/// A vector `d` in `{-1, 0, 1}^p`, naming the orthant event `O^d` and the
/// partition `(D-, D+, D0)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(d: Vec<i8>) -> Result<Self> {
        if let Some(j) = d.iter().position(|s| !(-1..=1).contains(s)) {
            return Err(LassoError::InvalidInput(format!(
                "sign entry {} = {} is not in {{-1, 0, 1}}",
                j + 1,
                d[j]
            )));
        }
        Ok(Self(d))
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![0; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, j: usize) -> i8 {
        self.0[j]
    }

    pub fn d_minus(&self) -> Vec<usize> {
        self.indices_where(-1)
    }

    pub fn d_plus(&self) -> Vec<usize> {
        self.indices_where(1)
    }

    pub fn d_zero(&self) -> Vec<usize> {
        self.indices_where(0)
    }

    /// `D- ∪ D+` in ascending order.
    pub fn active(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j] != 0).collect()
    }

    pub fn l1_norm(&self) -> usize {
        self.0.iter().filter(|&&s| s != 0).count()
    }

    /// Whether `v` lies in the orthant `O^d` (exact signs).
    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.0.len()
            && v.iter().zip(&self.0).all(|(&x, &s)| match s {
                -1 => x < 0.0,
                1 => x > 0.0,
                _ => x == 0.0,
            })
    }

    /// All `3^p` sign vectors in lexicographic order (-1 < 0 < 1).
    pub fn all(p: usize) -> impl Iterator<Item = SignVector> {
        let total = 3usize.pow(p as u32);
        (0..total).map(move |mut k| {
            let mut d = vec![0i8; p];
            for slot in d.iter_mut().rev() {
                *slot = (k % 3) as i8 - 1;
                k /= 3;
            }
            SignVector(d)
        })
    }

    fn indices_where(&self, s: i8) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j] == s).collect()
    }
}

impl TryFrom<Vec<i8>> for SignVector {
    type Error = LassoError;

    fn try_from(value: Vec<i8>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<SignVector> for Vec<i8> {
    fn from(d: SignVector) -> Self {
        d.0
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// `d_j = 0` iff `|z_j| <= zero_tol`, otherwise `sgn(z_j)`.
pub fn sign_partition(z: &[f64], zero_tol: f64) -> SignVector {
    SignVector(
        z.iter()
            .map(|&v| {
                if v.abs() <= zero_tol {
                    0
                } else if v > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect(),
    )
}

/// `y = X beta + eps`, `eps ~ N(0, sigma^2 I_n)`.
#[derive(Clone, Debug, Serialize)]
pub struct GaussianModel {
    beta: Vec<f64>,
    sigma: f64,
    mu: Vec<f64>,
}

impl GaussianModel {
    pub fn new(problem: &DesignProblem, beta: Vec<f64>, sigma: f64) -> Result<Self> {
        check_len("beta", problem.p(), beta.len())?;
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(LassoError::InvalidInput(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(LassoError::InvalidInput("beta has non-finite entries".into()));
        }
        let mu = problem.fit(&beta)?;
        Ok(Self { beta, sigma, mu })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
}

/// Whether two parameter vectors identify the same mean `X beta`.
pub fn fiber_equivalent(
    first: &GaussianModel,
    second: &GaussianModel,
    problem: &DesignProblem,
) -> Result<bool> {
    check_len("first beta", problem.p(), first.beta.len())?;
    check_len("second beta", problem.p(), second.beta.len())?;
    let mu1 = problem.fit(&first.beta)?;
    let mu2 = problem.fit(&second.beta)?;
    let scale = mu1
        .iter()
        .chain(&mu2)
        .fold(1.0_f64, |acc, v| acc.max(v.abs()));
    Ok(mu1
        .iter()
        .zip(&mu2)
        .all(|(a, b)| (a - b).abs() <= 1e-10 * scale))
}
