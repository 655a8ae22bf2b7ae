mod common;

use common::{design, mc_box, phi, tuning};
use lassogeom::distribution::{piece_density, prob_orthant, EstimateKind};
use lassogeom::{
    cdf, conditional_density, mvn_box_probability, prob_all_zero, prob_orthant_event, prob_region_high,
    DesignProblem, Execution, GaussianModel, LassoError, Method, OrthantEvent, Precision, SignVector, TuningVector,
};
use nalgebra::DMatrix;

fn correlated_setup() -> (DesignProblem, GaussianModel, TuningVector) {
    let x = design(&[&[1.0, 0.5], &[0.0, 0.75f64.sqrt()]]);
    let model = GaussianModel::new(&x, vec![0.0, -0.25], 1.0).unwrap();
    (x, model, tuning(&[0.75, 0.75]))
}

fn mc(samples: usize, seed: u64) -> Precision {
    Precision {
        samples,
        seed,
        ..Precision::default()
    }
}

#[test]
fn mvn_box_matches_plain_monte_carlo() {
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
    let prec = Precision {
        quad_tol: 1e-5,
        seed: 4,
        ..Precision::default()
    };
    let r = mvn_box_probability(&[0.0, 0.0], &cov, &[-0.75; 2], &[0.75; 2], &prec).unwrap();
    assert_eq!(r.method, EstimateKind::QuasiMonteCarlo);
    let (p, se) = mc_box(&[0.0, 0.0], &cov, &[-0.75; 2], &[0.75; 2], 1_000_000, 5);
    assert!((r.estimate - p).abs() <= 3.0 * se.hypot(r.std_error), "{} vs {p}", r.estimate);
}

#[test]
fn mvn_box_handles_singular_covariance() {
    // (W1, W2) = (t, 2t): P(|t| <= 0.5, |2t| <= 2) = P(|t| <= 0.5).
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
    let r = mvn_box_probability(&[0.0, 0.0], &cov, &[-0.5, -2.0], &[0.5, 2.0], &Precision::default()).unwrap();
    assert!((r.estimate - (phi(0.5) - phi(-0.5))).abs() < 1e-12);
}

#[test]
fn orthant_masses_partition_three_dimensions() {
    let x = design(&[&[1.0, 0.2, -0.3], &[0.1, 1.0, 0.4], &[0.0, 0.3, 0.9], &[0.5, 0.0, 0.2]]);
    let model = GaussianModel::new(&x, vec![0.4, 0.0, -0.2], 0.8).unwrap();
    let t = tuning(&[0.3, 0.6, 0.5]);
    let prec = Precision::default();
    let total: f64 = SignVector::all(3)
        .map(|d| prob_orthant(&x, &model, &t, &d, Method::Quadrature, &prec).unwrap().estimate)
        .sum();
    assert!((total - 1.0).abs() < 1e-5, "{total}");
}

#[test]
fn cdf_is_monotone_and_tends_to_one() {
    let (x, model, t) = correlated_setup();
    let prec = Precision::default();
    let grid = [-1.5, -0.5, 0.0, 0.4, 1.2];
    let mut values = vec![vec![0.0; grid.len()]; grid.len()];
    for (i, &a) in grid.iter().enumerate() {
        for (j, &b) in grid.iter().enumerate() {
            values[i][j] = cdf(&x, &model, &t, &[a, b], Method::Quadrature, &prec).unwrap().estimate;
        }
    }
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            if i + 1 < grid.len() {
                assert!(values[i][j] <= values[i + 1][j] + 1e-9);
            }
            if j + 1 < grid.len() {
                assert!(values[i][j] <= values[i][j + 1] + 1e-9);
            }
        }
    }
    let top = cdf(&x, &model, &t, &[9.0, 9.0], Method::Quadrature, &prec).unwrap();
    assert!((top.estimate - 1.0).abs() < 1e-4);
}

/// Midpoint rule; never evaluates on the orthant boundary where the pieces jump.
fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    h * (0..steps).map(|k| f(a + h * (k as f64 + 0.5))).sum::<f64>()
}

/// Integrates the piece `h^d` over the error coordinates of `D+-` on a grid.
fn integrate_piece(x: &DesignProblem, model: &GaussianModel, t: &TuningVector, d: &SignVector) -> f64 {
    let prec = Precision::default();
    let beta = model.beta();
    let active = d.active();
    let range = |j: usize| {
        let edge = -beta[j];
        if d.get(j) > 0 {
            (edge, edge + 8.0)
        } else {
            (edge - 8.0, edge)
        }
    };
    let density = |u: &[(usize, f64)]| {
        let mut z: Vec<f64> = beta.iter().map(|b| -b).collect();
        for &(j, v) in u {
            z[j] = v;
        }
        piece_density(x, model, t, d, &z, &prec).unwrap()
    };
    match active.as_slice() {
        [] => density(&[]),
        [j] => {
            let (a, b) = range(*j);
            midpoint(|v| density(&[(*j, v)]), a, b, 4000)
        }
        [j, k] => {
            let (a, b) = range(*j);
            let (c, e) = range(*k);
            midpoint(|v| midpoint(|w| density(&[(*j, v), (*k, w)]), c, e, 300), a, b, 300)
        }
        _ => unreachable!(),
    }
}

#[test]
fn atom_and_continuous_parts_sum_to_one() {
    let (x, model, t) = correlated_setup();
    let prec = Precision::default();
    let atom = prob_all_zero(&x, &model, &t, Method::Quadrature, &prec).unwrap().estimate;
    let mut total = atom;
    for d in SignVector::all(2).filter(|d| d.l1_norm() > 0) {
        let integral = integrate_piece(&x, &model, &t, &d);
        let mass = prob_orthant(&x, &model, &t, &d, Method::Quadrature, &prec).unwrap().estimate;
        assert!((integral - mass).abs() < 2e-3, "d = {d}: {integral} vs {mass}");
        total += integral;
    }
    assert!((total - 1.0).abs() < 5e-3, "{total}");
}

#[test]
fn conditional_densities_integrate_to_one() {
    let (x, model, t) = correlated_setup();
    let prec = Precision::default();
    for signs in [vec![0, 1], vec![0, -1], vec![1, 0], vec![1, -1]] {
        let d = SignVector::new(signs).unwrap();
        let beta = model.beta();
        let active = d.active();
        let f = |vals: &[f64]| conditional_density(&x, &model, &t, &d, vals, &prec).unwrap();
        let edge = |j: usize| -beta[j];
        let integral = if active.len() == 1 {
            let j = active[0];
            let (a, b) = if d.get(j) > 0 { (edge(j), edge(j) + 8.0) } else { (edge(j) - 8.0, edge(j)) };
            midpoint(|v| f(&[v]), a, b, 4000)
        } else {
            let (j, k) = (active[0], active[1]);
            let rj = if d.get(j) > 0 { (edge(j), edge(j) + 8.0) } else { (edge(j) - 8.0, edge(j)) };
            let rk = if d.get(k) > 0 { (edge(k), edge(k) + 8.0) } else { (edge(k) - 8.0, edge(k)) };
            midpoint(|v| midpoint(|w| f(&[v, w]), rk.0, rk.1, 300), rj.0, rj.1, 300)
        };
        assert!((integral - 1.0).abs() < 1e-2, "d = {d}: {integral}");
    }
}

#[test]
fn piece_density_matches_simulated_histogram() {
    let (x, model, t) = correlated_setup();
    let d = SignVector::new(vec![0, 1]).unwrap();
    let prec = Precision::default();
    let (lo, hi) = (0.5, 1.0);
    let integral = midpoint(
        |v| piece_density(&x, &model, &t, &d, &[0.0, v], &prec).unwrap(),
        lo,
        hi,
        400,
    );
    let beta = model.beta().to_vec();
    let mc_est = prob_region_high(
        &x,
        &model,
        &t,
        |b| b[0] == 0.0 && (lo..=hi).contains(&(b[1] - beta[1])),
        &mc(100_000, 12),
    )
    .unwrap();
    assert!(
        (integral - mc_est.estimate).abs() <= 3.0 * mc_est.std_error + 1e-4,
        "{integral} vs {mc_est:?}"
    );
}

#[test]
fn marginal_cdf_in_one_by_two_example() {
    let x = design(&[&[1.0, 2.0]]);
    let model = GaussianModel::new(&x, vec![0.0, 0.0], 1.0).unwrap();
    let t = TuningVector::uniform(2, 1.0).unwrap();
    let r = prob_region_high(&x, &model, &t, |b| b[1] <= -0.5, &mc(100_000, 13)).unwrap();
    let want = phi(-1.5);
    assert!((want - 0.066807).abs() < 1e-6);
    assert!((r.estimate - want).abs() <= 3.0 * r.std_error, "{r:?}");
}

#[test]
fn region_probabilities_in_one_by_two_example() {
    let x = design(&[&[1.0, 2.0]]);
    let t = TuningVector::uniform(2, 1.0).unwrap();
    let a = GaussianModel::new(&x, vec![1.0, 0.0], 1.0).unwrap();
    let b = GaussianModel::new(&x, vec![0.0, 0.5], 1.0).unwrap();
    let prec = mc(20_000, 14);
    let ra = prob_region_high(&x, &a, &t, |v| v[1] > 0.1, &prec).unwrap();
    let rb = prob_region_high(&x, &b, &t, |v| v[1] > 0.1, &prec).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(prob_region_high(&x, &a, &t, |v| v[0] != 0.0, &prec).unwrap().estimate, 0.0);
    assert_eq!(prob_region_high(&x, &a, &t, |_| true, &prec).unwrap().estimate, 1.0);
}

#[test]
fn monte_carlo_is_reproducible_across_execution_modes() {
    let (x, model, t) = correlated_setup();
    let event = OrthantEvent::estimation_error(vec![0.3, 0.2], model.beta()).unwrap();
    let base = mc(5_000, 15);
    let seq = prob_orthant_event(&x, &model, &t, &event, Method::MonteCarlo, &Precision {
        execution: Execution::Sequential,
        ..base
    })
    .unwrap();
    let par = prob_orthant_event(&x, &model, &t, &event, Method::MonteCarlo, &base).unwrap();
    assert_eq!(seq, par);
    let again = prob_orthant_event(&x, &model, &t, &event, Method::MonteCarlo, &base).unwrap();
    assert_eq!(par, again);
}

#[test]
fn conditioning_on_a_null_orthant_is_rejected() {
    let x = design(&[&[1.0]]);
    let model = GaussianModel::new(&x, vec![0.0], 1.0).unwrap();
    let t = tuning(&[0.0]);
    let d = SignVector::new(vec![0]).unwrap();
    assert!(matches!(
        conditional_density(&x, &model, &t, &d, &[], &Precision::default()),
        Err(LassoError::NullConditioning { .. })
    ));
}

#[test]
fn cdf_dimension_limit_suggests_simulation() {
    let x = DesignProblem::new(DMatrix::identity(5, 5)).unwrap();
    let model = GaussianModel::new(&x, vec![0.0; 5], 1.0).unwrap();
    let t = TuningVector::uniform(5, 1.0).unwrap();
    match cdf(&x, &model, &t, &[0.0; 5], Method::Quadrature, &Precision::default()) {
        Err(LassoError::DimensionLimit { suggestion, .. }) => assert!(suggestion.contains("simulation")),
        other => panic!("unexpected {other:?}"),
    }
}
