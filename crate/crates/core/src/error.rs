use thiserror::Error;

#[derive(Debug, Error)]
pub enum LassoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("solver did not reach KKT residual {tol:e} after {iterations} sweeps (residual {residual:e})")]
    Convergence {
        iterations: usize,
        tol: f64,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("linear program failed: {message} (condition estimate {condition:e})")]
    Lp { message: String, condition: f64 },

    #[error("combinatorial limit exceeded: size {size} > {limit}{}", hint_suffix(.hint))]
    CombinatorialLimit {
        size: usize,
        limit: usize,
        hint: Option<&'static str>,
    },

    #[error("integration dimension {dim} exceeds limit {limit}; {suggestion}")]
    DimensionLimit {
        dim: usize,
        limit: usize,
        suggestion: &'static str,
    },

    #[error("design matrix must have full column rank (rank {rank} < p = {p}); {suggestion}")]
    RankDeficient {
        rank: usize,
        p: usize,
        suggestion: &'static str,
    },

    #[error("conditioning event has probability {probability:e}, below 1e-12")]
    NullConditioning { probability: f64 },

    #[error("covariance matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("{failures} of {replicates} replicates failed to converge")]
    SimulationFailures { failures: usize, replicates: usize },

    #[error("internal consistency error: {0}")]
    Internal(String),
}

fn hint_suffix(hint: &Option<&'static str>) -> String {
    match hint {
        Some(h) => format!("; {h}"),
        None => String::new(),
    }
}

impl LassoError {
    /// Errors caused by size or numerical limits rather than malformed input.
    pub fn is_numerical_limit(&self) -> bool {
        !matches!(
            self,
            LassoError::InvalidInput(_) | LassoError::DimensionMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LassoError>;

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(LassoError::DimensionMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}
