//! Independent oracles and random instance generators shared by the
//! integration tests.

#![allow(dead_code)]

use lassogeom::{DesignProblem, TuningVector};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn design(rows: &[&[f64]]) -> DesignProblem {
    DesignProblem::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn tuning(lambda: &[f64]) -> TuningVector {
    TuningVector::new(lambda.to_vec()).unwrap()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Objective `||y - X b||^2 + 2 sum lambda_j |b_j|`, computed from scratch.
pub fn lasso_objective(x: &DMatrix<f64>, y: &[f64], lambda: &[f64], b: &[f64]) -> f64 {
    let r = DVector::from_column_slice(y) - x * DVector::from_column_slice(b);
    let pen: f64 = lambda.iter().zip(b).map(|(l, v)| l * v.abs()).sum();
    r.norm_squared() + 2.0 * pen
}

/// Accelerated proximal gradient (FISTA with adaptive restart) on
/// `1/2 ||y - X b||^2 + sum lambda_j |b_j|`, which has the same minimizers.
pub fn proximal_gradient(x: &DMatrix<f64>, y: &[f64], lambda: &[f64], iterations: usize) -> Vec<f64> {
    let p = x.ncols();
    let gram = x.transpose() * x;
    let xty = x.transpose() * DVector::from_column_slice(y);
    let lipschitz = gram
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |a, &v| a.max(v));
    if lipschitz == 0.0 {
        return vec![0.0; p];
    }
    let step = 1.0 / lipschitz;
    let prox = |v: &DVector<f64>| {
        DVector::from_iterator(
            p,
            v.iter().zip(lambda).map(|(&a, &l)| {
                let t = l * step;
                if a > t {
                    a - t
                } else if a < -t {
                    a + t
                } else {
                    0.0
                }
            }),
        )
    };
    let mut b = DVector::zeros(p);
    let mut w = b.clone();
    let mut t = 1.0_f64;
    for _ in 0..iterations {
        let grad = &gram * &w - &xty;
        let next = prox(&(&w - grad * step));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        // Restart momentum when it points uphill.
        if (&next - &b).dot(&(&w - &next)) > 0.0 {
            w = next.clone();
            t = 1.0;
        } else {
            w = &next + (&next - &b) * ((t - 1.0) / t_next);
            t = t_next;
        }
        b = next;
    }
    b.iter().copied().collect()
}

/// Standard normal distribution function via the complementary error function.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Plain Monte-Carlo rectangle probability of `N(mean, cov)`.
pub fn mc_box(mean: &[f64], cov: &DMatrix<f64>, lower: &[f64], upper: &[f64], n: usize, seed: u64) -> (f64, f64) {
    let m = mean.len();
    let l = cov.clone().cholesky().expect("positive definite").l();
    let mut rng = rng(seed);
    let mut hits = 0usize;
    for _ in 0..n {
        let xi = DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let v = &l * xi;
        if (0..m).all(|i| {
            let x = mean[i] + v[i];
            lower[i] <= x && x <= upper[i]
        }) {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}
