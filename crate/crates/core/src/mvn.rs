//! Gaussian probabilities of polyhedra `lower <= mean + L t <= upper`,
//! `t ~ N(0, I_r)`, by sequential conditioning: once `L` is lower
//! trapezoidal, every constraint pins one latent coordinate to an interval
//! given the earlier ones, and the probability becomes an integral over
//! `[0, 1]^(r-1)` of a product of univariate normal masses.

use std::cell::Cell;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::normal;
use crate::quadrature::{self, Estimate};

const PRIMES: [f64; 12] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
pub(crate) const RQMC_SHIFTS: usize = 8;

#[derive(Clone, Debug)]
pub(crate) struct GaussianPolytope {
    offset: Vec<f64>,
    factor: DMatrix<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    owned: Vec<Vec<usize>>,
    constant_ok: bool,
}

/// Result of a randomized lattice rule.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RqmcEstimate {
    pub value: f64,
    pub std_error: f64,
    pub points: usize,
}

impl GaussianPolytope {
    /// `factor` must be lower trapezoidal (row `i` vanishes past column `i`).
    pub fn from_triangular(offset: Vec<f64>, factor: DMatrix<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let r = factor.ncols();
        let mut owned = vec![Vec::new(); r];
        let mut constant_ok = true;
        for i in 0..factor.nrows() {
            let scale = factor.row(i).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let last = (0..r).rev().find(|&k| factor[(i, k)].abs() > 1e-13 * scale && scale > 0.0);
            match last {
                Some(k) => owned[k].push(i),
                None => {
                    if offset[i] < lower[i] || offset[i] > upper[i] {
                        constant_ok = false;
                    }
                }
            }
        }
        Self {
            offset,
            factor,
            lower,
            upper,
            owned,
            constant_ok,
        }
    }

    /// Accepts any `m x r` factor with `r <= m`; rotates the latent space so
    /// the factor becomes lower trapezoidal.
    pub fn from_factor(offset: Vec<f64>, factor: DMatrix<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        if factor.ncols() == 0 {
            return Self::from_triangular(offset, factor, lower, upper);
        }
        let r_factor = factor.transpose().qr().r();
        let trapezoidal = r_factor.transpose();
        Self::from_triangular(offset, trapezoidal, lower, upper)
    }

    pub fn latent_dim(&self) -> usize {
        self.factor.ncols()
    }

    fn interval(&self, k: usize, t: &[f64]) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for &i in &self.owned[k] {
            let rest: f64 = self.offset[i] + (0..k).map(|l| self.factor[(i, l)] * t[l]).sum::<f64>();
            let c = self.factor[(i, k)];
            let (mut a, mut b) = ((self.lower[i] - rest) / c, (self.upper[i] - rest) / c);
            if c < 0.0 {
                std::mem::swap(&mut a, &mut b);
            }
            lo = lo.max(a);
            hi = hi.min(b);
        }
        (lo, hi)
    }

    fn draw(a: f64, b: f64, mass: f64, u: f64) -> f64 {
        let t = if a > 0.0 {
            -normal::quantile(normal::cdf(-a) - u * mass)
        } else {
            normal::quantile(normal::cdf(a) + u * mass)
        };
        t.clamp(a, b)
    }

    fn nested(&self, k: usize, t: &mut Vec<f64>, tol: f64) -> Estimate {
        let (a, b) = self.interval(k, t);
        let mass = normal::interval(a, b);
        if mass <= 0.0 {
            return Estimate { value: 0.0, error: 0.0 };
        }
        if k + 1 == self.latent_dim() {
            return Estimate { value: mass, error: 0.0 };
        }
        let inner_error = Cell::new(0.0_f64);
        let outer = quadrature::integrate(
            |u| {
                t.truncate(k);
                t.push(Self::draw(a, b, mass, u));
                let e = self.nested(k + 1, t, tol);
                inner_error.set(inner_error.get().max(e.error));
                e.value
            },
            0.0,
            1.0,
            tol,
        );
        t.truncate(k);
        Estimate {
            value: (mass * outer.value).clamp(0.0, 1.0),
            error: mass * (outer.error + inner_error.get()),
        }
    }

    /// Nested adaptive Gauss–Kronrod with absolute tolerance `axis_tol` per level.
    pub fn quadrature(&self, axis_tol: f64) -> Estimate {
        if !self.constant_ok {
            return Estimate { value: 0.0, error: 0.0 };
        }
        if self.latent_dim() == 0 {
            return Estimate { value: 1.0, error: 0.0 };
        }
        let mut t = Vec::with_capacity(self.latent_dim());
        self.nested(0, &mut t, axis_tol)
    }

    fn integrand(&self, u: &[f64], t: &mut Vec<f64>) -> f64 {
        t.clear();
        let mut product = 1.0;
        for k in 0..self.latent_dim() {
            let (a, b) = self.interval(k, t);
            let mass = normal::interval(a, b);
            product *= mass;
            if product <= 0.0 {
                return 0.0;
            }
            if k + 1 < self.latent_dim() {
                t.push(Self::draw(a, b, mass, u[k]));
            }
        }
        product
    }

    /// Randomized Richtmyer lattice with the baker's transform and
    /// [`RQMC_SHIFTS`] random shifts. Doubles the point count until three
    /// standard errors fall below `tol` or `max_points` is reached.
    pub fn rqmc(&self, tol: f64, max_points: usize, seed: u64) -> RqmcEstimate {
        if !self.constant_ok {
            return RqmcEstimate { value: 0.0, std_error: 0.0, points: 0 };
        }
        let dim = self.latent_dim().saturating_sub(1);
        if dim == 0 {
            return RqmcEstimate {
                value: self.quadrature(tol).value,
                std_error: 0.0,
                points: 0,
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shifts: Vec<Vec<f64>> = (0..RQMC_SHIFTS)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect();
        let alpha: Vec<f64> = (0..dim).map(|k| PRIMES[k % PRIMES.len()].sqrt().fract()).collect();
        let per_shift_cap = (max_points / RQMC_SHIFTS).max(64);
        let mut n = 256.min(per_shift_cap);
        let mut t = Vec::with_capacity(self.latent_dim());
        let mut u = vec![0.0; dim];
        loop {
            let means: Vec<f64> = shifts
                .iter()
                .map(|shift| {
                    let mut sum = 0.0;
                    for i in 1..=n {
                        for k in 0..dim {
                            let x = (i as f64 * alpha[k] + shift[k]).fract();
                            u[k] = 1.0 - (2.0 * x - 1.0).abs();
                        }
                        sum += self.integrand(&u, &mut t);
                    }
                    sum / n as f64
                })
                .collect();
            let m = means.len() as f64;
            let value = means.iter().sum::<f64>() / m;
            let var = means.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (m - 1.0);
            let std_error = (var / m).sqrt();
            if 3.0 * std_error <= tol || 2 * n > per_shift_cap {
                return RqmcEstimate {
                    value: value.clamp(0.0, 1.0),
                    std_error,
                    points: n * RQMC_SHIFTS,
                };
            }
            n *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bivariate(rho: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, rho, (1.0 - rho * rho).sqrt()])
    }

    #[test]
    fn independent_box_is_a_product() {
        let poly = GaussianPolytope::from_triangular(
            vec![0.0, 0.0],
            bivariate(0.0),
            vec![-1.0, 0.0],
            vec![1.0, f64::INFINITY],
        );
        let want = normal::interval(-1.0, 1.0) * 0.5;
        assert!((poly.quadrature(1e-10).value - want).abs() < 1e-9);
        assert!((poly.rqmc(1e-6, 1 << 16, 3).value - want).abs() < 1e-5);
    }

    #[test]
    fn correlated_orthant_has_closed_form() {
        // P(X > 0, Y > 0) = 1/4 + asin(rho) / (2 pi).
        for rho in [-0.7, 0.3, 0.5, 0.9] {
            let poly = GaussianPolytope::from_triangular(
                vec![0.0, 0.0],
                bivariate(rho),
                vec![0.0, 0.0],
                vec![f64::INFINITY; 2],
            );
            let want = 0.25 + f64::asin(rho) / (2.0 * std::f64::consts::PI);
            assert!((poly.quadrature(1e-10).value - want).abs() < 1e-8, "rho {rho}");
        }
    }

    #[test]
    fn singular_factor_reduces_to_line() {
        // (W1, W2) = (t, 2t): box [-1, 1] x [-1, 1] is t in [-1/2, 1/2].
        let factor = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let poly = GaussianPolytope::from_factor(vec![0.0, 0.0], factor, vec![-1.0; 2], vec![1.0; 2]);
        assert!((poly.quadrature(1e-12).value - normal::interval(-0.5, 0.5)).abs() < 1e-14);
    }

    #[test]
    fn rotated_factor_matches_triangular() {
        let c: DMatrix<f64> = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.4, 0.3, 1.0, 0.2, -0.4, 0.2, 1.5]);
        let chol = c.clone().cholesky().unwrap().l();
        let eig = c.symmetric_eigen();
        let mut root = eig.eigenvectors.clone();
        for k in 0..3 {
            let s: f64 = eig.eigenvalues[k].sqrt();
            root.column_mut(k).scale_mut(s);
        }
        let lo = vec![-1.0, -0.5, f64::NEG_INFINITY];
        let hi = vec![1.5, 2.0, 0.7];
        let mean = vec![0.2, -0.1, 0.3];
        let a = GaussianPolytope::from_triangular(mean.clone(), chol, lo.clone(), hi.clone()).quadrature(1e-9);
        let b = GaussianPolytope::from_factor(mean, root, lo, hi).quadrature(1e-9);
        assert!((a.value - b.value).abs() < 1e-7, "{a:?} {b:?}");
    }
}
