//! Command-line front end for `lassogeom`.
//!
//! Every subcommand reads a problem (`--input`, JSON envelope or CSV design)
//! and writes JSON, or CSV for grids and simulation tables, to standard
//! output. Indices in all input and output are 1-based.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lassogeom::{EventTarget, Method, Precision};

mod commands;
pub mod envelope;
pub mod error;
pub mod format;

use envelope::{parse_vector, LambdaSpec, ProblemEnvelope};
use error::{CliError, EXIT_INPUT, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "lassogeom", version, about = "Geometry and exact distribution of the weighted Lasso")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve at a response and report the fit, KKT residual and uniqueness at y.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// KKT residual target.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Indices that some response can make nonzero.
    StructuralSet {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Whether some response selects exactly the given model.
    Selectable {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Model as 1-based indices, e.g. `1,3`.
        #[arg(long, allow_hyphen_values = true)]
        model: String,
    },
    /// Uniqueness for every response, with a witness pair when it fails.
    CheckUnique {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Whether the columns of X are in general position.
    GeneralPosition {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// P(b = 0).
    ProbZero {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        dist: DistArgs,
    },
    /// Probability of the orthant event anchored at `--z`.
    OrthantProb {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        dist: DistArgs,
        /// Event thresholds.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Whether `--z` refers to the estimation error b - beta or to b.
        #[arg(long, value_enum, default_value_t = TargetArg::Error)]
        target: TargetArg,
    },
    /// Joint CDF of the estimation error b - beta at `--z`.
    Cdf {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Density of the estimation error on a grid, as CSV `z1,...,zp,value`.
    ///
    /// Without `--signs` every coordinate is gridded and the full-dimensional
    /// piece containing each point is evaluated. With `--signs` only the
    /// nonzero coordinates of that piece are gridded; the others are reported
    /// at `-beta_j`.
    DensityGrid {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        dist: DistArgs,
        /// Grid per axis as `lo:hi:steps`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Sign pattern of the piece, e.g. `+0` or `1,0`.
        #[arg(long, allow_hyphen_values = true)]
        signs: Option<String>,
    },
    /// Monte-Carlo replicates compared against the analytic probabilities.
    Simulate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        report: ReportFormat,
        /// Integration tolerance for the analytic targets.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Shrinkage area of a Lasso value, from a least-squares estimate `--z` or a Lasso value `--b`.
    ShrinkageMap {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "b", required_unless_present = "b")]
        z: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
    },
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Problem file: JSON envelope, or a headerless CSV design matrix.
    #[arg(long)]
    input: PathBuf,
    /// Tuning vector, or one value for every coordinate.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Response vector.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
}

impl ProblemArgs {
    /// The envelope from `--input` with flag values taking precedence.
    fn load(&self) -> Result<ProblemEnvelope, CliError> {
        let mut envelope = ProblemEnvelope::load(&self.input)?;
        if let Some(text) = &self.lambda {
            let v = vector_flag("lambda", text)?;
            envelope.lambda = Some(match v.as_slice() {
                [single] => LambdaSpec::Uniform(*single),
                _ => LambdaSpec::Vector(v),
            });
        }
        if let Some(text) = &self.beta {
            envelope.beta = Some(vector_flag("beta", text)?);
        }
        if let Some(sigma) = self.sigma {
            envelope.sigma = Some(sigma);
        }
        if let Some(text) = &self.y {
            envelope.y = Some(vector_flag("y", text)?);
        }
        Ok(envelope)
    }
}

fn vector_flag(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    parse_vector(text).map_err(|e| CliError::Input(format!("--{name}: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Quad,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Error,
    Estimator,
}

impl From<TargetArg> for EventTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Error => EventTarget::Error,
            TargetArg::Estimator => EventTarget::Estimator,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Quad)]
    method: MethodArg,
    /// Monte-Carlo sample size.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Integration tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

impl DistArgs {
    fn method(&self) -> Method {
        match self.method {
            MethodArg::Quad => Method::Quadrature,
            MethodArg::Mc => Method::MonteCarlo,
        }
    }

    fn precision(&self) -> Precision {
        Precision {
            quad_tol: self.tol,
            samples: self.samples,
            seed: self.seed,
            ..Precision::default()
        }
    }
}

/// Exit status and captured streams of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                },
                _ => Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match commands::run(cli.command) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
