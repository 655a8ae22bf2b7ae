//! Geometry and finite-sample distribution of the weighted Lasso
//! `min_b ||y - X b||^2 + 2 sum_j lambda_j |b_j|` in fixed designs of any rank.
//!
//! - [`solver`]: coordinate descent, optimality checks, solution sets.
//! - [`geometry`]: selectable models, structural sets, uniqueness, shrinkage sets.
//! - [`distribution`]: orthant probabilities, densities and CDF under Gaussian errors.
//! - [`simulate`]: Monte-Carlo experiments and analytic/empirical comparison.

pub mod distribution;
pub mod error;
pub mod geometry;
mod linalg;
pub mod lp;
pub mod model;
mod mvn;
pub mod normal;
pub mod par;
mod quadrature;
pub mod simulate;
pub mod solver;

pub use distribution::{
    cdf, conditional_density, mvn_box_probability, piece_density, prob_all_zero, prob_orthant,
    prob_orthant_event, prob_region_high, EstimateKind, EventTarget, Method, OrthantEvent, Precision,
    RegionProbability,
};
pub use error::{LassoError, Result};
pub use geometry::{
    check_uniqueness, construct_nonuniqueness_witness, general_position, map_ls_to_lasso,
    selectable, shrinkage_set_high, shrinkage_set_low, structural_set, FaceBox, NonUniquenessWitness,
    ShrinkageSet, UniquenessVerdict,
};
pub use linalg::numerical_rank;
pub use model::{fiber_equivalent, sign_partition, DesignProblem, GaussianModel, SignVector, TuningVector};
pub use par::Execution;
pub use simulate::{
    compare_analytic_empirical, estimate_nonuniqueness_probability, run_simulation, simulate_replicates,
    ComparisonReport, EmpiricalSummary, SimulationConfig,
};
pub use solver::{
    describe_solution_set, is_solution, objective, solve, solve_with, LassoSolution, SolverOptions,
};
