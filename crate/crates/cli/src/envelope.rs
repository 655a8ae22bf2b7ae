//! Problem input: a JSON envelope, or a headerless CSV design plus flags.

use std::fs;
use std::path::Path;

use lassogeom::{DesignProblem, GaussianModel, TuningVector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Either one value for every coordinate or a full vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Uniform(f64),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemEnvelope {
    /// Design matrix as a list of rows.
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    pub lambda: Option<LambdaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
}

impl ProblemEnvelope {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed problem JSON: {e}")))
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut x = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Input(format!("malformed design CSV: {e}")))?;
            let row = record
                .iter()
                .map(|cell| {
                    cell.parse::<f64>()
                        .map_err(|_| CliError::Input(format!("design CSV row {}: cannot parse {cell:?}", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            x.push(row);
        }
        Ok(Self {
            x,
            ..Self::default()
        })
    }

    /// Reads `.csv` files as a bare design matrix and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let is_csv = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
        if is_csv {
            Self::from_csv(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn design(&self) -> Result<DesignProblem, CliError> {
        if self.x.is_empty() {
            return Err(CliError::Input("design matrix X is empty".into()));
        }
        Ok(DesignProblem::from_rows(&self.x)?)
    }

    pub fn tuning(&self, p: usize) -> Result<TuningVector, CliError> {
        match &self.lambda {
            None => Err(CliError::Input("lambda is required (envelope field or --lambda)".into())),
            Some(LambdaSpec::Uniform(v)) => Ok(TuningVector::uniform(p, *v)?),
            Some(LambdaSpec::Vector(v)) if v.len() != p => Err(CliError::Input(format!(
                "lambda has length {}, expected p = {p}",
                v.len()
            ))),
            Some(LambdaSpec::Vector(v)) => Ok(TuningVector::new(v.clone())?),
        }
    }

    pub fn response(&self, n: usize) -> Result<Vec<f64>, CliError> {
        let y = self
            .y
            .clone()
            .ok_or_else(|| CliError::Input("response y is required (envelope field or --y)".into()))?;
        if y.len() != n {
            return Err(CliError::Input(format!("y has length {}, expected n = {n}", y.len())));
        }
        Ok(y)
    }

    pub fn model(&self, problem: &DesignProblem) -> Result<GaussianModel, CliError> {
        let beta = self
            .beta
            .clone()
            .ok_or_else(|| CliError::Input("beta is required (envelope field or --beta)".into()))?;
        let sigma = self
            .sigma
            .ok_or_else(|| CliError::Input("sigma is required (envelope field or --sigma)".into()))?;
        Ok(GaussianModel::new(problem, beta, sigma)?)
    }
}

/// Parses `1,2.5,-3` into floats.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| format!("not a number: {s:?}"))
        })
        .collect()
}

/// Parses `1,3` into zero-based indices, rejecting 0.
pub fn parse_indices(text: &str) -> Result<Vec<usize>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<usize>() {
                Ok(0) => Err("indices are 1-based".to_string()),
                Ok(i) => Ok(i - 1),
                Err(_) => Err(format!("not an index: {s:?}")),
            }
        })
        .collect()
}

/// Parses a sign vector written as `1,0,-1` or `+0-`.
pub fn parse_signs(text: &str) -> Result<Vec<i8>, String> {
    let text = text.trim();
    if text.contains(',') {
        return text
            .split(',')
            .map(|s| match s.trim() {
                "1" | "+1" | "+" => Ok(1),
                "0" => Ok(0),
                "-1" | "-" => Ok(-1),
                other => Err(format!("not a sign: {other:?}")),
            })
            .collect();
    }
    text.chars()
        .map(|c| match c {
            '+' => Ok(1),
            '0' => Ok(0),
            '-' => Ok(-1),
            other => Err(format!("not a sign: {other:?}")),
        })
        .collect()
}

/// `lo:hi:steps`, with at least two points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.steps).map(|k| self.lo + h * k as f64).collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.steps - 1) as f64
    }
}

pub fn parse_grid(text: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err("expected lo:hi:steps".into());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    let steps: usize = steps.trim().parse().map_err(|_| format!("bad step count {steps:?}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err("grid needs finite bounds with lo < hi".into());
    }
    if steps < 2 {
        return Err("grid needs at least 2 points".into());
    }
    Ok(Grid { lo, hi, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_accepts_scalar_and_vector_lambda() {
        let e = ProblemEnvelope::from_json(r#"{"X": [[1, 2]], "lambda": 2}"#).unwrap();
        assert_eq!(e.tuning(2).unwrap().as_slice(), &[2.0, 2.0]);
        let e = ProblemEnvelope::from_json(r#"{"X": [[1, 2]], "lambda": [1, 2], "y": [3]}"#).unwrap();
        assert_eq!(e.tuning(2).unwrap().as_slice(), &[1.0, 2.0]);
        assert_eq!(e.response(1).unwrap(), vec![3.0]);
        assert!(e.tuning(3).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ProblemEnvelope::from_json(r#"{"X": [[1]], "lambda": 1, "mu": 2}"#).is_err());
    }

    #[test]
    fn csv_design() {
        let e = ProblemEnvelope::from_csv("1, 1, 0\n0, 1, 1\n").unwrap();
        assert_eq!(e.x, vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]);
        assert!(ProblemEnvelope::from_csv("1,a\n").is_err());
    }

    #[test]
    fn list_parsers() {
        assert_eq!(parse_vector("1, -2.5,3e1").unwrap(), vec![1.0, -2.5, 30.0]);
        assert_eq!(parse_indices("1,3").unwrap(), vec![0, 2]);
        assert!(parse_indices("0").is_err());
        assert_eq!(parse_signs("+0-").unwrap(), vec![1, 0, -1]);
        assert_eq!(parse_signs("1,0,-1").unwrap(), vec![1, 0, -1]);
        let g = parse_grid("-1:1:5").unwrap();
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("0:1:1").is_err());
    }
}
