use std::collections::BTreeMap;

use lassogeom::geometry::{selectable_witness, FaceConstraint, ShrinkageCoordinates, ShrinkageSet};
use lassogeom::solver::DEFAULT_SOLVER_TOL;
use lassogeom::{
    cdf, check_uniqueness, compare_analytic_empirical, describe_solution_set, general_position, map_ls_to_lasso,
    piece_density, prob_all_zero, prob_orthant, prob_orthant_event, run_simulation, shrinkage_set_high,
    shrinkage_set_low, simulate_replicates, structural_set, ComparisonReport, DesignProblem, EmpiricalSummary,
    EstimateKind, EventTarget, GaussianModel, LassoError, Method, OrthantEvent, RegionProbability, SignVector,
    SimulationConfig, TuningVector,
};
use serde::Serialize;

use crate::envelope::{parse_grid, parse_indices, parse_signs, parse_vector, Grid};
use crate::error::CliError;
use crate::format::{float, to_csv, to_json};
use crate::{Command, DistArgs, ProblemArgs, ReportFormat, TargetArg};

/// Grid evaluations allowed in one `density-grid` call.
const MAX_GRID_POINTS: usize = 1_000_000;

/// Largest `p` for which `simulate` compares every orthant probability.
const ORTHANT_REPORT_LIMIT: usize = 3;

pub(crate) fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::Solve { problem, tol } => solve(&problem, tol),
        Command::StructuralSet { problem } => {
            let (x, t) = design_and_tuning(&problem)?;
            #[derive(Serialize)]
            struct Out {
                structural_set: Vec<usize>,
            }
            to_json(&Out {
                structural_set: one_based(&structural_set(&x, &t)?),
            })
        }
        Command::Selectable { problem, model } => selectable(&problem, &model),
        Command::CheckUnique { problem } => check_unique(&problem),
        Command::GeneralPosition { problem } => {
            let x = problem.load()?.design()?;
            #[derive(Serialize)]
            struct Out {
                general_position: bool,
            }
            to_json(&Out {
                general_position: general_position(&x)?,
            })
        }
        Command::ProbZero { problem, dist } => {
            let (x, model, t) = distribution_inputs(&problem)?;
            to_json(&prob_all_zero(&x, &model, &t, dist.method(), &dist.precision())?)
        }
        Command::OrthantProb {
            problem,
            dist,
            z,
            target,
        } => orthant_prob(&problem, &dist, &z, target),
        Command::Cdf { problem, dist, z } => {
            let (x, model, t) = distribution_inputs(&problem)?;
            let z = vector_arg("z", &z)?;
            #[derive(Serialize)]
            struct Out {
                z: Vec<f64>,
                #[serde(flatten)]
                probability: RegionProbability,
            }
            let probability = cdf(&x, &model, &t, &z, dist.method(), &dist.precision())?;
            to_json(&Out { z, probability })
        }
        Command::DensityGrid {
            problem,
            dist,
            grid,
            signs,
        } => density_grid(&problem, &dist, &grid, signs.as_deref()),
        Command::Simulate {
            problem,
            reps,
            seed,
            report,
            tol,
        } => simulate(&problem, reps, seed, report, tol),
        Command::ShrinkageMap { problem, z, b } => shrinkage_map(&problem, z.as_deref(), b.as_deref()),
    }
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|j| j + 1).collect()
}

fn vector_arg(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    parse_vector(text).map_err(|e| CliError::Input(format!("--{name}: {e}")))
}

fn check_len(name: &str, v: &[f64], p: usize) -> Result<(), CliError> {
    if v.len() != p {
        return Err(CliError::Input(format!("--{name} has length {}, expected p = {p}", v.len())));
    }
    Ok(())
}

fn design_and_tuning(args: &ProblemArgs) -> Result<(DesignProblem, TuningVector), CliError> {
    let envelope = args.load()?;
    let x = envelope.design()?;
    let t = envelope.tuning(x.p())?;
    Ok((x, t))
}

fn distribution_inputs(args: &ProblemArgs) -> Result<(DesignProblem, GaussianModel, TuningVector), CliError> {
    let envelope = args.load()?;
    let x = envelope.design()?;
    let t = envelope.tuning(x.p())?;
    let model = envelope.model(&x)?;
    Ok((x, model, t))
}

fn solve(args: &ProblemArgs, tol: Option<f64>) -> Result<String, CliError> {
    let envelope = args.load()?;
    let x = envelope.design()?;
    let t = envelope.tuning(x.p())?;
    let y = envelope.response(x.n())?;
    let description = describe_solution_set(&x, &y, &t, tol.unwrap_or(DEFAULT_SOLVER_TOL))?;
    #[derive(Serialize)]
    struct Out {
        b: Vec<f64>,
        fit: Vec<f64>,
        objective: f64,
        kkt_residual: f64,
        active_model: Vec<usize>,
        unique_at_y: bool,
    }
    let anchor = description.anchor;
    to_json(&Out {
        b: anchor.b,
        fit: anchor.fit,
        objective: anchor.objective,
        kkt_residual: anchor.kkt_residual,
        active_model: one_based(&anchor.active_model),
        unique_at_y: description.is_unique_at_y,
    })
}

#[derive(Serialize)]
struct FaceOut {
    model: Vec<usize>,
    signs: Vec<i8>,
    z: Vec<f64>,
    v: Vec<f64>,
}

fn selectable(args: &ProblemArgs, model: &str) -> Result<String, CliError> {
    let (x, t) = design_and_tuning(args)?;
    let model = parse_indices(model).map_err(|e| CliError::Input(format!("--model: {e}")))?;
    if let Some(&j) = model.iter().find(|&&j| j >= x.p()) {
        return Err(CliError::Input(format!("--model index {} exceeds p = {}", j + 1, x.p())));
    }
    let witness = selectable_witness(&x, &t, &model)?;
    #[derive(Serialize)]
    struct Out {
        model: Vec<usize>,
        selectable: bool,
        certificate: Option<FaceOut>,
    }
    let mut sorted = model.clone();
    sorted.sort_unstable();
    sorted.dedup();
    to_json(&Out {
        model: one_based(&sorted),
        selectable: witness.is_some(),
        certificate: witness.map(|f| FaceOut {
            model: one_based(&f.model),
            signs: f.signs,
            z: f.z,
            v: f.v,
        }),
    })
}

fn check_unique(args: &ProblemArgs) -> Result<String, CliError> {
    let (x, t) = design_and_tuning(args)?;
    let verdict = check_uniqueness(&x, &t)?;
    #[derive(Serialize)]
    struct WitnessOut {
        y: Vec<f64>,
        b: Vec<f64>,
        b_tilde: Vec<f64>,
        dependent_column: usize,
    }
    #[derive(Serialize)]
    struct Out {
        unique: bool,
        witness: Option<WitnessOut>,
        violating_face: Option<FaceOut>,
    }
    to_json(&Out {
        unique: verdict.unique,
        witness: verdict.witness.map(|w| WitnessOut {
            y: w.y,
            b: w.b,
            b_tilde: w.b_tilde,
            dependent_column: w.dependent_column + 1,
        }),
        violating_face: verdict.violating_face.map(|f| FaceOut {
            model: one_based(&f.model),
            signs: f.signs,
            z: f.z,
            v: f.v,
        }),
    })
}

fn orthant_prob(args: &ProblemArgs, dist: &DistArgs, z: &str, target: TargetArg) -> Result<String, CliError> {
    let (x, model, t) = distribution_inputs(args)?;
    let z = vector_arg("z", z)?;
    check_len("z", &z, x.p())?;
    let event = match EventTarget::from(target) {
        EventTarget::Error => OrthantEvent::estimation_error(z, model.beta())?,
        EventTarget::Estimator => OrthantEvent::estimator(z),
    };
    let probability = prob_orthant_event(&x, &model, &t, &event, dist.method(), &dist.precision())?;
    #[derive(Serialize)]
    struct Out {
        z: Vec<f64>,
        d: Vec<i8>,
        target: EventTarget,
        #[serde(flatten)]
        probability: RegionProbability,
    }
    to_json(&Out {
        d: event.d.as_slice().to_vec(),
        z: event.z,
        target: event.target,
        probability,
    })
}

/// Cartesian product of `grid` over `axes`, last axis fastest.
fn grid_points(grid: &Grid, axes: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let total = (0..axes).try_fold(1usize, |acc, _| acc.checked_mul(grid.steps));
    match total {
        Some(n) if n <= MAX_GRID_POINTS => {}
        _ => {
            return Err(CliError::Input(format!(
                "grid of {} points on {axes} axes exceeds {MAX_GRID_POINTS} evaluations",
                grid.steps
            )))
        }
    }
    let values = grid.points();
    let mut points = vec![Vec::with_capacity(axes)];
    for _ in 0..axes {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    Ok(points)
}

fn density_grid(args: &ProblemArgs, dist: &DistArgs, grid: &str, signs: Option<&str>) -> Result<String, CliError> {
    let (x, model, t) = distribution_inputs(args)?;
    let grid = parse_grid(grid).map_err(|e| CliError::Input(format!("--grid: {e}")))?;
    let p = x.p();
    let beta = model.beta();
    let piece = match signs {
        Some(text) => {
            let s = parse_signs(text).map_err(|e| CliError::Input(format!("--signs: {e}")))?;
            Some(SignVector::new(s)?)
        }
        None => None,
    };
    if let Some(d) = &piece {
        if d.len() != p {
            return Err(CliError::Input(format!("--signs has length {}, expected p = {p}", d.len())));
        }
    }
    let axes: Vec<usize> = match &piece {
        Some(d) => d.active(),
        None => (0..p).collect(),
    };
    let points = grid_points(&grid, axes.len())?;
    let full_point = |g: &[f64]| {
        let mut z: Vec<f64> = beta.iter().map(|b| 0.0 - b).collect();
        for (&j, &v) in axes.iter().zip(g) {
            z[j] = v;
        }
        z
    };
    // Points on an orthant boundary belong to the positive side.
    let piece_at = |z: &[f64]| -> SignVector {
        match &piece {
            Some(d) => d.clone(),
            None => SignVector::new(z.iter().zip(beta).map(|(z, b)| if z + b >= 0.0 { 1 } else { -1 }).collect())
                .expect("entries are +-1"),
        }
    };

    let values: Vec<f64> = match dist.method() {
        Method::Quadrature => {
            let precision = dist.precision();
            points
                .iter()
                .map(|g| {
                    let z = full_point(g);
                    piece_density(&x, &model, &t, &piece_at(&z), &z, &precision)
                })
                .collect::<Result<_, LassoError>>()?
        }
        Method::MonteCarlo => {
            let config = SimulationConfig {
                n_rep: dist.samples,
                seed: dist.seed,
                ..SimulationConfig::default()
            };
            let draws = simulate_replicates(&x, &model, &t, &config)?;
            let h = grid.spacing();
            let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for b in &draws {
                let signs: Vec<i8> = b.iter().map(|v| if *v == 0.0 { 0 } else { v.signum() as i8 }).collect();
                let wanted = match &piece {
                    Some(d) => signs.as_slice() == d.as_slice(),
                    None => signs.iter().all(|&s| s != 0),
                };
                if !wanted {
                    continue;
                }
                let cell: Option<Vec<usize>> = axes
                    .iter()
                    .map(|&j| {
                        let k = ((b[j] - beta[j] - grid.lo) / h).round();
                        (k >= 0.0 && k < grid.steps as f64).then_some(k as usize)
                    })
                    .collect();
                if let Some(cell) = cell {
                    *counts.entry(cell).or_default() += 1;
                }
            }
            let volume = h.powi(axes.len() as i32);
            let n = draws.len().max(1) as f64;
            let mut values = Vec::with_capacity(points.len());
            let mut index = vec![0usize; axes.len()];
            for _ in 0..points.len() {
                values.push(counts.get(&index).copied().unwrap_or(0) as f64 / (n * volume));
                for k in (0..index.len()).rev() {
                    index[k] += 1;
                    if index[k] < grid.steps {
                        break;
                    }
                    index[k] = 0;
                }
            }
            values
        }
    };

    let mut header: Vec<String> = (1..=p).map(|j| format!("z{j}")).collect();
    header.push("value".into());
    let rows: Vec<Vec<String>> = points
        .iter()
        .zip(&values)
        .map(|(g, v)| {
            let mut row: Vec<String> = full_point(g).into_iter().map(float).collect();
            row.push(float(*v));
            row
        })
        .collect();
    to_csv(&header, &rows)
}

#[derive(Serialize)]
struct Comparison {
    target: String,
    #[serde(flatten)]
    report: ComparisonReport,
}

#[derive(Serialize)]
struct Skipped {
    target: String,
    reason: String,
}

fn empirical(count: usize, n: usize, seed: u64) -> RegionProbability {
    let f = if n == 0 { 0.0 } else { count as f64 / n as f64 };
    RegionProbability {
        estimate: f,
        std_error: (f * (1.0 - f) / n.max(1) as f64).sqrt(),
        method: EstimateKind::MonteCarlo,
        n_samples: n,
        seed,
        quad_tol: 0.0,
    }
}

fn pattern_label(d: &SignVector) -> String {
    d.as_slice()
        .iter()
        .map(|s| match s {
            1 => '+',
            -1 => '-',
            _ => '0',
        })
        .collect()
}

fn simulate(args: &ProblemArgs, reps: usize, seed: u64, report: ReportFormat, tol: f64) -> Result<String, CliError> {
    let (x, model, t) = distribution_inputs(args)?;
    let config = SimulationConfig {
        n_rep: reps,
        seed,
        ..SimulationConfig::default()
    };
    let summary = run_simulation(&x, &model, &t, &config)?;
    let precision = lassogeom::Precision {
        quad_tol: tol,
        ..lassogeom::Precision::default()
    };
    let n = summary.completed();

    let mut targets = vec![("all_zero".to_string(), SignVector::zeros(x.p()))];
    if x.is_full_column_rank() && x.p() <= ORTHANT_REPORT_LIMIT {
        targets.extend(
            SignVector::all(x.p())
                .filter(|d| d.l1_norm() > 0)
                .map(|d| (format!("orthant {}", pattern_label(&d)), d)),
        );
    }
    let mut comparisons = Vec::new();
    let mut skipped = Vec::new();
    let mut analytic_by_pattern: BTreeMap<SignVector, f64> = BTreeMap::new();
    for (target, d) in targets {
        let analytic = if d.l1_norm() == 0 {
            prob_all_zero(&x, &model, &t, Method::Quadrature, &precision)
        } else {
            prob_orthant(&x, &model, &t, &d, Method::Quadrature, &precision)
        };
        match analytic {
            Ok(analytic) => {
                analytic_by_pattern.insert(d.clone(), analytic.estimate);
                let emp = empirical(summary.pattern_count(d.as_slice()), n, seed);
                comparisons.push(Comparison {
                    target,
                    report: compare_analytic_empirical(&analytic, &emp),
                });
            }
            Err(e) if e.is_numerical_limit() => skipped.push(Skipped {
                target,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e.into()),
        }
    }

    match report {
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Out {
                summary: SummaryOut,
                comparisons: Vec<Comparison>,
                skipped: Vec<Skipped>,
                pass: bool,
            }
            let pass = comparisons.iter().all(|c| c.report.pass);
            to_json(&Out {
                summary: SummaryOut::from(&summary),
                comparisons,
                skipped,
                pass,
            })
        }
        ReportFormat::Csv => {
            let mut header: Vec<String> = (1..=x.p()).map(|j| format!("d{j}")).collect();
            header.extend(["count", "frequency", "analytic"].map(String::from));
            let rows: Vec<Vec<String>> = summary
                .sign_pattern_freq
                .iter()
                .map(|c| {
                    let mut row: Vec<String> = c.signs.as_slice().iter().map(|s| s.to_string()).collect();
                    row.push(c.count.to_string());
                    row.push(float(c.count as f64 / n.max(1) as f64));
                    row.push(analytic_by_pattern.get(&c.signs).map(|v| float(*v)).unwrap_or_default());
                    row
                })
                .collect();
            to_csv(&header, &rows)
        }
    }
}

#[derive(Serialize)]
struct PatternOut {
    signs: Vec<i8>,
    count: usize,
}

#[derive(Serialize)]
struct SupportOut {
    support: Vec<usize>,
    count: usize,
}

#[derive(Serialize)]
struct EcdfOut {
    index: usize,
    z: Vec<f64>,
    value: Vec<f64>,
}

#[derive(Serialize)]
struct SummaryOut {
    n_rep: usize,
    failures: usize,
    nonunique_count: usize,
    sign_pattern_freq: Vec<PatternOut>,
    support_freq: Vec<SupportOut>,
    ecdf_grid: Vec<EcdfOut>,
}

impl From<&EmpiricalSummary> for SummaryOut {
    fn from(s: &EmpiricalSummary) -> Self {
        Self {
            n_rep: s.n_rep,
            failures: s.failures,
            nonunique_count: s.nonunique_count,
            sign_pattern_freq: s
                .sign_pattern_freq
                .iter()
                .map(|c| PatternOut {
                    signs: c.signs.as_slice().to_vec(),
                    count: c.count,
                })
                .collect(),
            support_freq: s
                .support_freq
                .iter()
                .map(|c| SupportOut {
                    support: one_based(&c.support),
                    count: c.count,
                })
                .collect(),
            ecdf_grid: s
                .ecdf_grid
                .iter()
                .map(|e| EcdfOut {
                    index: e.index + 1,
                    z: e.z.clone(),
                    value: e.value.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct Bounds {
    lower: f64,
    upper: f64,
}

fn shrinkage_map(args: &ProblemArgs, z: Option<&str>, b: Option<&str>) -> Result<String, CliError> {
    let (x, t) = design_and_tuning(args)?;
    let (z, set): (Option<Vec<f64>>, ShrinkageSet) = match (z, b) {
        (Some(z), _) => {
            let z = vector_arg("z", z)?;
            check_len("z", &z, x.p())?;
            let solution = map_ls_to_lasso(&x, &t, &z)?;
            let set = shrinkage_set_low(&x, &t, &solution.b)?;
            (Some(z), set)
        }
        (None, Some(b)) => {
            let b = vector_arg("b", b)?;
            check_len("b", &b, x.p())?;
            (None, shrinkage_set_high(&x, &t, &b)?)
        }
        (None, None) => return Err(CliError::Input("one of --z or --b is required".into())),
    };
    #[derive(Serialize)]
    struct Out {
        #[serde(skip_serializing_if = "Option::is_none")]
        z: Option<Vec<f64>>,
        b: Vec<f64>,
        coordinates: ShrinkageCoordinates,
        /// The set of `X'y` values mapped to `b`.
        cross_product_box: Vec<Bounds>,
        singleton: Option<Vec<f64>>,
    }
    let cross_product_box = set
        .face
        .constraints
        .iter()
        .zip(&set.center)
        .map(|(c, center)| match *c {
            FaceConstraint::Fixed(v) => Bounds {
                lower: center + v,
                upper: center + v,
            },
            FaceConstraint::Interval(l) => Bounds {
                lower: center - l,
                upper: center + l,
            },
        })
        .collect();
    to_json(&Out {
        z,
        singleton: set.singleton(),
        b: set.b,
        coordinates: set.coordinates,
        cross_product_box,
    })
}
