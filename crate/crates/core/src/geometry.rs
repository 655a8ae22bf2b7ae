//! Polyhedral geometry of the weighted Lasso.
//!
//! A Lasso solution selecting model `M` exists for some response iff the row
//! space `col(X')` meets the face family
//!
//! ```text
//! B_M = prod_j { {-lambda_j, lambda_j}  j in M
//!              { [-lambda_j, lambda_j]  j not in M
//! ```
//!
//! of the lambda-box. Everything here reduces to small LP feasibility tests
//! of the form "find z with X'z on a sign-resolved face".

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, LassoError, Result};
use crate::linalg::{lstsq, numerical_rank, select_columns};
use crate::lp::{find_feasible_point, Constraint, Relation, FEASIBILITY_TOL};
use crate::model::{DesignProblem, TuningVector};
use crate::par::{find_map_first, Execution};
use crate::solver::{self, is_solution, LassoSolution, SolverOptions};

/// Largest model for which `selectable` enumerates sign patterns.
pub const SELECTABLE_LIMIT: usize = 30;
/// Default largest `p` for the exhaustive uniqueness check.
pub const UNIQUENESS_LIMIT: usize = 14;
/// Largest `p` for the exhaustive general-position test.
pub const GENERAL_POSITION_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceConstraint {
    /// The coordinate is pinned to this value (`+-lambda_j`).
    Fixed(f64),
    /// The coordinate ranges over `[-h, h]`.
    Interval(f64),
}

impl FaceConstraint {
    fn admits(&self, v: f64, tol: f64) -> bool {
        match *self {
            FaceConstraint::Fixed(f) => (v - f).abs() <= tol,
            FaceConstraint::Interval(h) => v.abs() <= h + tol,
        }
    }
}

/// A sign-resolved face of the lambda-box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceBox {
    pub constraints: Vec<FaceConstraint>,
    /// Indices carrying a `Fixed` constraint.
    pub model: Vec<usize>,
}

impl FaceBox {
    /// The full lambda-box (no fixed coordinate).
    pub fn lambda_box(tuning: &TuningVector) -> Self {
        Self {
            constraints: tuning
                .as_slice()
                .iter()
                .map(|&l| FaceConstraint::Interval(l))
                .collect(),
            model: Vec::new(),
        }
    }

    /// Fixes `model[k]` at `signs[k] * lambda`; unpenalized members are fixed at 0.
    pub fn resolved(tuning: &TuningVector, model: &[usize], signs: &[i8]) -> Result<Self> {
        check_len("sign pattern", model.len(), signs.len())?;
        let mut face = Self::lambda_box(tuning);
        for (&j, &s) in model.iter().zip(signs) {
            if j >= tuning.len() {
                return Err(LassoError::InvalidInput(format!(
                    "model index {} out of range 1..={}",
                    j + 1,
                    tuning.len()
                )));
            }
            if s != 1 && s != -1 {
                return Err(LassoError::InvalidInput(format!("face sign must be +-1, got {s}")));
            }
            face.constraints[j] = FaceConstraint::Fixed(s as f64 * tuning.get(j));
        }
        face.model = model.to_vec();
        face.model.sort_unstable();
        face.model.dedup();
        Ok(face)
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.len() == self.constraints.len()
            && self
                .constraints
                .iter()
                .zip(v)
                .all(|(c, &x)| c.admits(x, tol))
    }
}

/// The unresolved family `B_M` (each member of `M` at either sign).
#[derive(Clone, Debug)]
pub struct ModelFace<'a> {
    tuning: &'a TuningVector,
    in_model: Vec<bool>,
    model: Vec<usize>,
}

impl<'a> ModelFace<'a> {
    pub fn new(tuning: &'a TuningVector, model: &[usize]) -> Result<Self> {
        let mut in_model = vec![false; tuning.len()];
        for &j in model {
            if j >= tuning.len() {
                return Err(LassoError::InvalidInput(format!(
                    "model index {} out of range 1..={}",
                    j + 1,
                    tuning.len()
                )));
            }
            in_model[j] = true;
        }
        let model = (0..tuning.len()).filter(|&j| in_model[j]).collect();
        Ok(Self {
            tuning,
            in_model,
            model,
        })
    }

    pub fn model(&self) -> &[usize] {
        &self.model
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.len() == self.in_model.len()
            && v.iter().enumerate().all(|(j, &x)| {
                let l = self.tuning.get(j);
                if self.in_model[j] {
                    (x.abs() - l).abs() <= tol
                } else {
                    x.abs() <= l + tol
                }
            })
    }

    /// Penalized members of the model; unpenalized ones have a single face value 0.
    fn penalized(&self) -> Vec<usize> {
        self.model
            .iter()
            .copied()
            .filter(|&j| self.tuning.is_penalized(j))
            .collect()
    }

    /// Number of sign resolutions up to the global sign flip `v -> -v`.
    fn pattern_count(&self) -> usize {
        match self.penalized().len() {
            0 => 1,
            k => 1usize << (k - 1),
        }
    }

    /// Sign pattern `index` (aligned with `model()`): the first penalized
    /// member is always `+`, bit `i` of `index` flips penalized member `i + 1`.
    fn pattern(&self, index: usize) -> Vec<i8> {
        let penalized = self.penalized();
        self.model
            .iter()
            .map(|j| match penalized.iter().position(|p| p == j) {
                Some(0) | None => 1,
                Some(i) => {
                    if index >> (i - 1) & 1 == 1 {
                        -1
                    } else {
                        1
                    }
                }
            })
            .collect()
    }
}

/// Certificate that `col(X')` meets a face: `v = X'z` lies in it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceWitness {
    pub z: Vec<f64>,
    pub v: Vec<f64>,
}

/// A sign-resolved face meeting the row space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolatingFace {
    pub model: Vec<usize>,
    /// Signs aligned with `model`.
    pub signs: Vec<i8>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
}

/// Two distinct solutions for one response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonUniquenessWitness {
    pub y: Vec<f64>,
    pub b: Vec<f64>,
    pub b_tilde: Vec<f64>,
    /// The dependent column whose coefficient differs (`b_tilde[j] = 0`).
    pub dependent_column: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessVerdict {
    pub unique: bool,
    pub witness: Option<NonUniquenessWitness>,
    pub violating_face: Option<ViolatingFace>,
}

/// Finds `z` with `X'z` in the sign-resolved `face`, if any.
pub fn face_intersects_row_space(
    problem: &DesignProblem,
    face: &FaceBox,
    tol: f64,
) -> Result<Option<FaceWitness>> {
    check_len("face", problem.p(), face.constraints.len())?;
    let x = problem.x();
    let n = problem.n();
    let mut constraints = Vec::with_capacity(2 * problem.p());
    for (j, c) in face.constraints.iter().enumerate() {
        let coeffs: Vec<f64> = x.column(j).iter().copied().collect();
        match *c {
            FaceConstraint::Fixed(f) => constraints.push(Constraint::new(coeffs, Relation::Eq, f)),
            FaceConstraint::Interval(h) => {
                constraints.push(Constraint::new(coeffs.clone(), Relation::Le, h));
                constraints.push(Constraint::new(coeffs, Relation::Ge, -h));
            }
        }
    }
    let Some(z) = find_feasible_point(n, &constraints, tol)? else {
        return Ok(None);
    };
    let v = problem.xt(&z)?;
    Ok(Some(FaceWitness { z, v }))
}

fn first_intersecting_pattern(
    problem: &DesignProblem,
    family: &ModelFace<'_>,
) -> Result<Option<ViolatingFace>> {
    for k in 0..family.pattern_count() {
        let signs = family.pattern(k);
        let face = FaceBox::resolved(family.tuning, family.model(), &signs)?;
        if let Some(w) = face_intersects_row_space(problem, &face, FEASIBILITY_TOL)? {
            return Ok(Some(ViolatingFace {
                model: family.model().to_vec(),
                signs,
                z: w.z,
                v: w.v,
            }));
        }
    }
    Ok(None)
}

/// Whether some response makes the Lasso select exactly `model`.
pub fn selectable(problem: &DesignProblem, tuning: &TuningVector, model: &[usize]) -> Result<bool> {
    Ok(selectable_witness(problem, tuning, model)?.is_some())
}

/// As [`selectable`], returning the first intersecting face in pattern order.
pub fn selectable_witness(
    problem: &DesignProblem,
    tuning: &TuningVector,
    model: &[usize],
) -> Result<Option<ViolatingFace>> {
    tuning.check_dim(problem.p())?;
    let family = ModelFace::new(tuning, model)?;
    if family.model().len() > SELECTABLE_LIMIT {
        return Err(LassoError::CombinatorialLimit {
            size: family.model().len(),
            limit: SELECTABLE_LIMIT,
            hint: None,
        });
    }
    first_intersecting_pattern(problem, &family)
}

/// Indices that are nonzero in some Lasso solution for some response.
pub fn structural_set(problem: &DesignProblem, tuning: &TuningVector) -> Result<Vec<usize>> {
    tuning.check_dim(problem.p())?;
    let mut set = Vec::new();
    for j in 0..problem.p() {
        // The two facets fixing j are mirror images, so one sign suffices.
        let face = FaceBox::resolved(tuning, &[j], &[1])?;
        if face_intersects_row_space(problem, &face, FEASIBILITY_TOL)?.is_some() {
            set.push(j);
        }
    }
    Ok(set)
}

/// Exhaustive check that the Lasso solution is unique for every response.
///
/// Only models of size `rank(X) + 1` are enumerated: faces shrink as the
/// model grows, so a larger intersecting model implies an intersecting
/// subset of that size.
pub fn check_uniqueness(problem: &DesignProblem, tuning: &TuningVector) -> Result<UniquenessVerdict> {
    check_uniqueness_with(problem, tuning, UNIQUENESS_LIMIT, Execution::default())
}

pub fn check_uniqueness_with(
    problem: &DesignProblem,
    tuning: &TuningVector,
    limit: usize,
    execution: Execution,
) -> Result<UniquenessVerdict> {
    tuning.check_dim(problem.p())?;
    let p = problem.p();
    if p > limit {
        return Err(LassoError::CombinatorialLimit {
            size: p,
            limit,
            hint: Some("general_position is a sufficient-only fallback for uniform tuning"),
        });
    }
    let size = problem.rank() + 1;
    if size > p {
        return Ok(UniquenessVerdict {
            unique: true,
            witness: None,
            violating_face: None,
        });
    }
    let models: Vec<Vec<usize>> = (0..p).combinations(size).collect();
    let found = find_map_first(execution, models.len(), |i| {
        let family = match ModelFace::new(tuning, &models[i]) {
            Ok(f) => f,
            Err(e) => return Some(Err(e)),
        };
        first_intersecting_pattern(problem, &family).transpose()
    })
    .transpose()?;

    match found {
        None => Ok(UniquenessVerdict {
            unique: true,
            witness: None,
            violating_face: None,
        }),
        Some(face) => {
            let witness = construct_nonuniqueness_witness(problem, tuning, &face.model, &face.v)?;
            Ok(UniquenessVerdict {
                unique: false,
                witness: Some(witness),
                violating_face: Some(face),
            })
        }
    }
}

/// Builds a response with two distinct Lasso solutions from a point
/// `v in col(X') ∩ B_M` with `|M| > rank(X)`.
pub fn construct_nonuniqueness_witness(
    problem: &DesignProblem,
    tuning: &TuningVector,
    model: &[usize],
    v: &[f64],
) -> Result<NonUniquenessWitness> {
    tuning.check_dim(problem.p())?;
    check_len("face point", problem.p(), v.len())?;
    let family = ModelFace::new(tuning, model)?;
    let model = family.model().to_vec();
    if model.len() <= problem.rank() {
        return Err(LassoError::InvalidInput(format!(
            "model size {} must exceed rank {}",
            model.len(),
            problem.rank()
        )));
    }
    let scale = tuning.as_slice().iter().fold(1.0_f64, |a, &l| a.max(l));
    if !family.contains(v, 1e-7 * scale) {
        return Err(LassoError::InvalidInput("face point is not in B_M".into()));
    }
    let (z, residual) = lstsq(
        &problem.x().transpose(),
        &DVector::from_column_slice(v),
    );
    let v_norm = DVector::from_column_slice(v).norm();
    if residual > 1e-8 * v_norm.max(1.0) {
        return Err(LassoError::InvalidInput(format!(
            "face point is not in the row space (residual {residual:e})"
        )));
    }
    let z: Vec<f64> = z.iter().copied().collect();
    let p = problem.p();

    // An unpenalized zero column leaves its coefficient arbitrary.
    if let Some(&j) = model
        .iter()
        .find(|&&j| !tuning.is_penalized(j) && problem.is_zero_column(j))
    {
        let anchor = solver::solve_with(problem, &z, tuning, &SolverOptions::default())?;
        let mut b_tilde = anchor.b.clone();
        b_tilde[j] += 1.0;
        return verified(problem, tuning, z, anchor.b, b_tilde, j);
    }

    let x = problem.x();
    for &j in &model {
        if problem.is_zero_column(j) {
            continue;
        }
        let others: Vec<usize> = model.iter().copied().filter(|&l| l != j).collect();
        let d = if tuning.is_penalized(j) { v[j].signum() } else { 1.0 };
        let target = x.column(j).into_owned() * d;
        let basis = select_columns(x, &others);
        let (coef, res) = lstsq(&basis, &target);
        if res > 1e-9 * target.norm().max(1.0) {
            continue;
        }
        let c = coef.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if c == 0.0 {
            continue;
        }
        let mut b = vec![0.0; p];
        let mut b_tilde = vec![0.0; p];
        b[j] = d / (2.0 * c);
        for (k, &l) in others.iter().enumerate() {
            let s = if tuning.is_penalized(l) { v[l].signum() } else { 0.0 };
            b[l] = s;
            b_tilde[l] = s + coef[k] / (2.0 * c);
        }
        let xb = problem.fit(&b)?;
        let y: Vec<f64> = z.iter().zip(&xb).map(|(a, c)| a + c).collect();
        return verified(problem, tuning, y, b, b_tilde, j);
    }
    Err(LassoError::Internal(
        "no dependent column with a valid decomposition in the model".into(),
    ))
}

fn verified(
    problem: &DesignProblem,
    tuning: &TuningVector,
    y: Vec<f64>,
    b: Vec<f64>,
    b_tilde: Vec<f64>,
    dependent_column: usize,
) -> Result<NonUniquenessWitness> {
    let scale = tuning.as_slice().iter().fold(1.0_f64, |a, &l| a.max(l));
    let tol = 1e-8 * scale;
    for (name, cand) in [("b", &b), ("b_tilde", &b_tilde)] {
        let rep = is_solution(problem, &y, tuning, cand, tol)?;
        if !rep.satisfied {
            return Err(LassoError::Internal(format!(
                "witness {name} violates optimality by {:e}",
                rep.max_violation
            )));
        }
    }
    Ok(NonUniquenessWitness {
        y,
        b,
        b_tilde,
        dependent_column,
    })
}

/// Whether the columns of `X` are in general position: no `k`-dimensional
/// affine subspace (`k < min(n, p)`) contains more than `k + 1` of the signed
/// columns `+-X_j`, antipodal pairs excluded.
pub fn general_position(problem: &DesignProblem) -> Result<bool> {
    let p = problem.p();
    if p > GENERAL_POSITION_LIMIT {
        return Err(LassoError::CombinatorialLimit {
            size: p,
            limit: GENERAL_POSITION_LIMIT,
            hint: None,
        });
    }
    let x = problem.x();
    let n = problem.n();
    let max_size = (n.min(p) + 1).min(p);
    let subsets: Vec<Vec<usize>> = (2..=max_size)
        .flat_map(|m| (0..p).combinations(m))
        .collect();
    let violation = find_map_first(Execution::default(), subsets.len(), |i| {
        let subset = &subsets[i];
        let m = subset.len();
        // Flipping every sign mirrors the point set, so the first sign stays +.
        for mask in 0..(1usize << (m - 1)) {
            let sign = |k: usize| if k > 0 && mask >> (k - 1) & 1 == 1 { -1.0 } else { 1.0 };
            let base = x.column(subset[0]) * sign(0);
            let mut diffs = DMatrix::zeros(n, m - 1);
            for k in 1..m {
                diffs.set_column(k - 1, &(x.column(subset[k]) * sign(k) - &base));
            }
            if numerical_rank(&diffs) <= m - 2 {
                return Some(());
            }
        }
        None
    });
    Ok(violation.is_none())
}

/// Which coordinates a [`ShrinkageSet`] is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShrinkageCoordinates {
    /// Least-squares estimates `z` (full column rank only): `z in S(b)`.
    LeastSquares,
    /// Cross products `X'y`: `X'y in S(b)` for any rank.
    CrossProduct,
}

/// The set of data values mapped to the Lasso value `b`:
/// `center + prod_j B_j(b_j)` with `center = X'X b`.
#[derive(Clone, Debug, Serialize)]
pub struct ShrinkageSet {
    pub b: Vec<f64>,
    pub center: Vec<f64>,
    pub face: FaceBox,
    pub coordinates: ShrinkageCoordinates,
    #[serde(skip)]
    gram: DMatrix<f64>,
}

impl ShrinkageSet {
    fn build(
        problem: &DesignProblem,
        tuning: &TuningVector,
        b: &[f64],
        coordinates: ShrinkageCoordinates,
    ) -> Result<Self> {
        tuning.check_dim(problem.p())?;
        let center = problem.gram_times(b)?;
        let constraints = b
            .iter()
            .enumerate()
            .map(|(j, &bj)| {
                if bj != 0.0 {
                    FaceConstraint::Fixed(bj.signum() * tuning.get(j))
                } else {
                    FaceConstraint::Interval(tuning.get(j))
                }
            })
            .collect();
        let model = (0..b.len()).filter(|&j| b[j] != 0.0).collect();
        Ok(Self {
            b: b.to_vec(),
            center,
            face: FaceBox { constraints, model },
            coordinates,
            gram: problem.gram().clone(),
        })
    }

    /// Membership of a point given in this set's coordinates.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        if point.len() != self.b.len() {
            return false;
        }
        let v: Vec<f64> = match self.coordinates {
            ShrinkageCoordinates::CrossProduct => point.to_vec(),
            ShrinkageCoordinates::LeastSquares => (&self.gram * DVector::from_column_slice(point))
                .iter()
                .copied()
                .collect(),
        };
        let offset: Vec<f64> = v.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.face.contains(&offset, tol)
    }

    /// When every `b_j != 0` the least-squares set is the single point
    /// `b - (X'X)^{-1} lt` with `lt_j = -sgn(b_j) lambda_j`.
    pub fn singleton(&self) -> Option<Vec<f64>> {
        if self.coordinates != ShrinkageCoordinates::LeastSquares || self.b.contains(&0.0) {
            return None;
        }
        let shift: Vec<f64> = self
            .face
            .constraints
            .iter()
            .map(|c| match *c {
                FaceConstraint::Fixed(f) => -f,
                FaceConstraint::Interval(_) => 0.0,
            })
            .collect();
        let solved = self
            .gram
            .clone()
            .cholesky()?
            .solve(&DVector::from_vec(shift));
        Some(self.b.iter().zip(solved.iter()).map(|(b, s)| b - s).collect())
    }
}

/// `S(b)`: least-squares estimates mapped to the Lasso value `b` (full column rank).
pub fn shrinkage_set_low(
    problem: &DesignProblem,
    tuning: &TuningVector,
    b: &[f64],
) -> Result<ShrinkageSet> {
    require_full_rank(problem)?;
    ShrinkageSet::build(problem, tuning, b, ShrinkageCoordinates::LeastSquares)
}

/// `S̄(b)`: values of `X'y` for which `b` is a Lasso solution (any rank).
pub fn shrinkage_set_high(
    problem: &DesignProblem,
    tuning: &TuningVector,
    b: &[f64],
) -> Result<ShrinkageSet> {
    ShrinkageSet::build(problem, tuning, b, ShrinkageCoordinates::CrossProduct)
}

/// The Lasso value whose shrinkage area contains the least-squares estimate `z_ls`.
pub fn map_ls_to_lasso(
    problem: &DesignProblem,
    tuning: &TuningVector,
    z_ls: &[f64],
) -> Result<LassoSolution> {
    require_full_rank(problem)?;
    let y = problem.fit(z_ls)?;
    let solution = solver::solve_with(problem, &y, tuning, &SolverOptions::default())?;
    let set = shrinkage_set_low(problem, tuning, &solution.b)?;
    let scale = tuning.as_slice().iter().fold(1.0_f64, |a, &l| a.max(l));
    if !set.contains(z_ls, 1e-8 * scale) {
        return Err(LassoError::Internal(
            "least-squares point is outside the shrinkage area of the computed solution".into(),
        ));
    }
    Ok(solution)
}

fn require_full_rank(problem: &DesignProblem) -> Result<()> {
    if !problem.is_full_column_rank() {
        return Err(LassoError::RankDeficient {
            rank: problem.rank(),
            p: problem.p(),
            suggestion: "use shrinkage_set_high in X'y coordinates",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(rows: &[&[f64]]) -> DesignProblem {
        DesignProblem::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn tuning(l: &[f64]) -> TuningVector {
        TuningVector::new(l.to_vec()).unwrap()
    }

    #[test]
    fn face_examples_for_one_by_two() {
        let p = design(&[&[1.0, 2.0]]);
        let t = tuning(&[1.0, 1.0]);
        let f1 = FaceBox::resolved(&t, &[0], &[1]).unwrap();
        assert!(face_intersects_row_space(&p, &f1, FEASIBILITY_TOL).unwrap().is_none());
        let f2 = FaceBox::resolved(&t, &[1], &[1]).unwrap();
        let w = face_intersects_row_space(&p, &f2, FEASIBILITY_TOL).unwrap().unwrap();
        assert!((w.z[0] - 0.5).abs() < 1e-12);
        assert!((w.v[0] - 0.5).abs() < 1e-12 && (w.v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_rank_meets_every_face() {
        let p = design(&[&[1.0, 0.3, 0.0], &[0.2, 1.0, 0.1], &[0.0, 0.4, 1.0]]);
        let t = tuning(&[0.5, 1.0, 2.0]);
        for signs in [[1, 1, 1], [1, -1, 1], [-1, -1, 1]] {
            let f = FaceBox::resolved(&t, &[0, 1, 2], &signs).unwrap();
            assert!(face_intersects_row_space(&p, &f, FEASIBILITY_TOL).unwrap().is_some());
        }
    }

    #[test]
    fn selectable_examples() {
        let p = design(&[&[1.0, 2.0]]);
        let t = tuning(&[0.7, 0.7]);
        assert!(!selectable(&p, &t, &[0]).unwrap());
        assert!(selectable(&p, &t, &[1]).unwrap());
        assert!(selectable(&p, &t, &[]).unwrap());
        let big = TuningVector::uniform(31, 1.0).unwrap();
        let wide = DesignProblem::new(DMatrix::from_element(1, 31, 1.0)).unwrap();
        let model: Vec<usize> = (0..31).collect();
        assert!(matches!(
            selectable(&wide, &big, &model),
            Err(LassoError::CombinatorialLimit { .. })
        ));
    }

    #[test]
    fn structural_set_examples() {
        let p = design(&[&[1.0, 2.0]]);
        assert_eq!(structural_set(&p, &tuning(&[3.0, 3.0])).unwrap(), vec![1]);
        let p = design(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
        assert_eq!(structural_set(&p, &tuning(&[1.0, 1.0, 1.0])).unwrap(), vec![0, 1, 2]);
        let p = design(&[&[2.0, 0.1], &[0.3, 1.0]]);
        assert_eq!(structural_set(&p, &tuning(&[0.4, 0.9])).unwrap(), vec![0, 1]);
    }

    #[test]
    fn uniqueness_examples() {
        let p = design(&[&[1.0, 2.0]]);
        assert!(check_uniqueness(&p, &tuning(&[1.0, 1.0])).unwrap().unique);
        let verdict = check_uniqueness(&p, &tuning(&[1.0, 2.0])).unwrap();
        assert!(!verdict.unique);
        let w = verdict.witness.unwrap();
        assert!(w.y[0].abs() > 1.0);
        let p4 = design(&[&[1.0, 1.0, 2.0, 0.0], &[0.0, 0.0, 1.0, 3.0]]);
        assert!(check_uniqueness(&p4, &tuning(&[1.0; 4])).unwrap().unique);
    }

    #[test]
    fn witness_from_example_face() {
        let p = design(&[&[1.0, 2.0]]);
        let t = tuning(&[1.0, 2.0]);
        let w = construct_nonuniqueness_witness(&p, &t, &[0, 1], &[1.0, 2.0]).unwrap();
        assert_eq!(w.dependent_column, 0);
        assert_eq!(w.b, vec![1.0, 1.0]);
        assert_eq!(w.b_tilde, vec![0.0, 1.5]);
        assert_eq!(w.y, vec![4.0]);
    }

    #[test]
    fn witness_for_unpenalized_zero_column() {
        let p = design(&[&[1.0, 0.0, 1.0], &[0.0, 0.0, 1.0]]);
        let t = tuning(&[1.0, 0.0, 1.0]);
        let verdict = check_uniqueness(&p, &t).unwrap();
        assert!(!verdict.unique);
        let w = verdict.witness.unwrap();
        assert_eq!(w.dependent_column, 1);
        assert!((w.b_tilde[1] - w.b[1]).abs() == 1.0);
    }

    #[test]
    fn witness_rejects_small_models_and_points_off_face() {
        let p = design(&[&[1.0, 2.0]]);
        let t = tuning(&[1.0, 2.0]);
        assert!(construct_nonuniqueness_witness(&p, &t, &[1], &[1.0, 2.0]).is_err());
        assert!(construct_nonuniqueness_witness(&p, &t, &[0, 1], &[0.5, 1.0]).is_err());
    }

    #[test]
    fn general_position_examples() {
        let p4 = design(&[&[1.0, 1.0, 2.0, 0.0], &[0.0, 0.0, 1.0, 3.0]]);
        assert!(!general_position(&p4).unwrap());
        assert!(general_position(&design(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap());
        // Three collinear points (1,0), (2,0)... with signs: X = [[1, 2, 3], [1, 1, 1]] lie on y = 1.
        assert!(!general_position(&design(&[&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]])).unwrap());
    }

    #[test]
    fn shrinkage_high_examples() {
        let p = design(&[&[1.0, 2.0]]);
        let t = tuning(&[1.0, 1.0]);
        let s0 = shrinkage_set_high(&p, &t, &[0.0, 0.0]).unwrap();
        for y in [-0.5, 0.0, 0.3, 0.5] {
            assert!(s0.contains(&p.xt(&[y]).unwrap(), 1e-12), "y = {y}");
        }
        assert!(!s0.contains(&p.xt(&[0.51]).unwrap(), 1e-12));
        let t = tuning(&[1.0, 2.0]);
        let s = shrinkage_set_high(&p, &t, &[-1.0, 0.0]).unwrap();
        assert!(s.contains(&[-2.0, -4.0], 1e-12));
        assert!(shrinkage_set_low(&p, &t, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn shrinkage_low_examples() {
        let p = design(&[&[1.0, 0.5], &[0.0, 0.75f64.sqrt()]]);
        let t = tuning(&[0.75, 0.75]);
        let s0 = shrinkage_set_low(&p, &t, &[0.0, 0.0]).unwrap();
        assert!(s0.contains(&[0.0, 0.0], 0.0));
        assert!(s0.contains(&[0.1, -0.1], 0.0));
        assert!(!s0.contains(&[2.0, 2.0], 1e-12));
        let sol = map_ls_to_lasso(&p, &t, &[0.1, -0.1]).unwrap();
        assert_eq!(sol.b, vec![0.0, 0.0]);
        assert_eq!(map_ls_to_lasso(&p, &t, &[0.0, 0.0]).unwrap().b, vec![0.0, 0.0]);

        let b = [1.0, -2.0];
        let s = shrinkage_set_low(&p, &t, &b).unwrap();
        let z = s.singleton().unwrap();
        assert!(s.contains(&z, 1e-12));
        let mapped = map_ls_to_lasso(&p, &t, &z).unwrap();
        assert!((mapped.b[0] - 1.0).abs() < 1e-9 && (mapped.b[1] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn nesting_of_model_faces() {
        let t = tuning(&[1.0, 2.0, 0.5]);
        let probes = [
            [1.0, 2.0, 0.5],
            [1.0, -2.0, 0.1],
            [0.3, 2.0, -0.5],
            [-1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ];
        let small = ModelFace::new(&t, &[0]).unwrap();
        let large = ModelFace::new(&t, &[0, 1]).unwrap();
        for v in probes {
            if large.contains(&v, 0.0) {
                assert!(small.contains(&v, 0.0));
            }
        }
    }
}
