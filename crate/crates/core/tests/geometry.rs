mod common;

use common::{design, gaussian_matrix, rng, tuning};
use lassogeom::geometry::{check_uniqueness_with, selectable_witness};
use lassogeom::{
    check_uniqueness, describe_solution_set, general_position, is_solution, selectable, shrinkage_set_high, solve,
    structural_set, DesignProblem, Execution, LassoError, TuningVector,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn wide_instance() -> impl Strategy<Value = (DMatrix<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..4, 2usize..6).prop_flat_map(|(n, p)| {
        (
            proptest::collection::vec(prop_oneof![-2.0f64..2.0, Just(1.0), Just(0.0)], n * p)
                .prop_map(move |v| DMatrix::from_row_slice(n, p, &v)),
            proptest::collection::vec(-4.0f64..4.0, n),
            proptest::collection::vec(0.1f64..2.0, p),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn supports_are_selectable_and_structural((x, y, lambda) in wide_instance()) {
        let problem = DesignProblem::new(x).unwrap();
        let t = tuning(&lambda);
        let sol = solve(&problem, &y, &t, 1e-12, 1_000_000).unwrap();
        let set = structural_set(&problem, &t).unwrap();
        for &j in &sol.active_model {
            prop_assert!(set.contains(&j), "support {:?} not within {:?}", sol.active_model, set);
        }
        prop_assert!(selectable(&problem, &t, &sol.active_model).unwrap());
    }

    #[test]
    fn cross_products_lie_in_their_shrinkage_set((x, y, lambda) in wide_instance()) {
        let problem = DesignProblem::new(x).unwrap();
        let t = tuning(&lambda);
        let sol = solve(&problem, &y, &t, 1e-12, 1_000_000).unwrap();
        let set = shrinkage_set_high(&problem, &t, &sol.b).unwrap();
        prop_assert!(set.contains(&problem.xt(&y).unwrap(), 1e-8));
    }

    #[test]
    fn structural_set_is_scale_invariant((x, _y, lambda) in wide_instance(), c in 0.05f64..20.0) {
        let problem = DesignProblem::new(x).unwrap();
        let t = tuning(&lambda);
        prop_assert_eq!(
            structural_set(&problem, &t).unwrap(),
            structural_set(&problem, &t.scaled(c).unwrap()).unwrap()
        );
    }

    #[test]
    fn uniqueness_verdict_agrees_with_pointwise_test((x, y, lambda) in wide_instance()) {
        let problem = DesignProblem::new(x).unwrap();
        let t = tuning(&lambda);
        let verdict = check_uniqueness(&problem, &t).unwrap();
        if verdict.unique {
            prop_assert!(describe_solution_set(&problem, &y, &t, 1e-12).unwrap().is_unique_at_y);
        } else {
            let w = verdict.witness.unwrap();
            prop_assert!(is_solution(&problem, &w.y, &t, &w.b, 1e-8).unwrap().satisfied);
            prop_assert!(is_solution(&problem, &w.y, &t, &w.b_tilde, 1e-8).unwrap().satisfied);
            prop_assert!(!describe_solution_set(&problem, &w.y, &t, 1e-12).unwrap().is_unique_at_y);
        }
    }

    #[test]
    fn verdict_does_not_depend_on_scheduling((x, _y, lambda) in wide_instance()) {
        let problem = DesignProblem::new(x).unwrap();
        let t = tuning(&lambda);
        let a = check_uniqueness_with(&problem, &t, 14, Execution::Sequential).unwrap();
        let b = check_uniqueness_with(&problem, &t, 14, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn general_position_implies_uniqueness_for_uniform_tuning() {
    let mut r = rng(21);
    for _ in 0..40 {
        let n = 1 + (r.random_range(0..3) as usize);
        let p = n + 1 + (r.random_range(0..3) as usize);
        let x = DesignProblem::new(gaussian_matrix(&mut r, n, p)).unwrap();
        if general_position(&x).unwrap() {
            let t = TuningVector::uniform(p, r.random_range(0.1..3.0)).unwrap();
            assert!(check_uniqueness(&x, &t).unwrap().unique);
        }
    }
}

#[test]
fn duplicated_columns_break_uniqueness() {
    let x = design(&[&[1.0, 1.0, 0.3], &[2.0, 2.0, -1.0]]);
    let t = TuningVector::uniform(3, 0.5).unwrap();
    let verdict = check_uniqueness(&x, &t).unwrap();
    assert!(!verdict.unique);
    let face = verdict.violating_face.unwrap();
    assert_eq!(face.model.len(), 3);
    assert!(!general_position(&x).unwrap());
}

#[test]
fn selectable_witness_certifies_face() {
    let x = design(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
    let t = tuning(&[1.0, 1.0, 1.0]);
    let face = selectable_witness(&x, &t, &[0, 2]).unwrap().unwrap();
    let v = x.xt(&face.z).unwrap();
    assert!((v[0].abs() - 1.0).abs() < 1e-9 && (v[2].abs() - 1.0).abs() < 1e-9);
    assert!(v[1].abs() <= 1.0 + 1e-9);
}

#[test]
fn combinatorial_limits_are_reported() {
    let x = DesignProblem::new(DMatrix::from_fn(2, 15, |i, j| (i + j) as f64)).unwrap();
    let t = TuningVector::uniform(15, 1.0).unwrap();
    match check_uniqueness(&x, &t) {
        Err(LassoError::CombinatorialLimit { size, limit, hint }) => {
            assert_eq!((size, limit), (15, 14));
            assert!(hint.unwrap().contains("general_position"));
        }
        other => panic!("unexpected {other:?}"),
    }
    let x13 = DesignProblem::new(DMatrix::from_fn(2, 13, |i, j| (i * j) as f64)).unwrap();
    assert!(matches!(general_position(&x13), Err(LassoError::CombinatorialLimit { .. })));
}
