//! Run reports: JSON and CSV serialization.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::search::{EstimateReport, OracleResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Pass,
    Fail,
    /// Both sides vanish (e.g. a constant grid function); excluded from margins.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub id: usize,
    pub kind: String,
    pub lhs: f64,
    /// Right side of the checked inequality, constants included.
    pub rhs: Option<f64>,
    /// Derived constant of the instance (τ, T, ...).
    pub constant: Option<f64>,
    /// `rhs − lhs`.
    pub margin: Option<f64>,
    /// Allowed negative margin.
    pub tolerance: f64,
    pub status: TrialStatus,
}

impl TrialRecord {
    pub(crate) fn check(id: usize, kind: &str, lhs: f64, rhs: f64, constant: Option<f64>, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        let status = if margin >= -tolerance { TrialStatus::Pass } else { TrialStatus::Fail };
        TrialRecord { id, kind: kind.into(), lhs, rhs: Some(rhs), constant, margin: Some(margin), tolerance, status }
    }

    pub(crate) fn degenerate(id: usize, kind: &str, lhs: f64) -> Self {
        TrialRecord {
            id,
            kind: kind.into(),
            lhs,
            rhs: None,
            constant: None,
            margin: None,
            tolerance: 0.0,
            status: TrialStatus::Degenerate,
        }
    }
}

/// The instance behind the first failing trial, sufficient to re-run the check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "instance", rename_all = "snake_case")]
pub enum Counterexample {
    /// Grid function on `ℤ_m^n` in row-major order.
    Grid { trial: usize, kind: String, n: usize, m: usize, k: Option<usize>, values: Vec<f64> },
    /// Vector tuple in the configured space.
    Vectors { trial: usize, kind: String, n: usize, m: usize, vectors: Vec<Vec<f64>> },
}

impl Counterexample {
    pub fn trial(&self) -> usize {
        match self {
            Counterexample::Grid { trial, .. } | Counterexample::Vectors { trial, .. } => *trial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub degenerate: usize,
    pub min_margin: Option<f64>,
}

impl Summary {
    pub fn from_trials(trials: &[TrialRecord]) -> Self {
        let count = |s| trials.iter().filter(|t| t.status == s).count();
        let min_margin = trials.iter().filter_map(|t| t.margin).reduce(f64::min);
        Summary {
            trials: trials.len(),
            passed: count(TrialStatus::Pass),
            failed: count(TrialStatus::Fail),
            degenerate: count(TrialStatus::Degenerate),
            min_margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub task: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// `(m, k)` actually used, when the task chose them.
    pub parameters: Option<(usize, usize)>,
    pub summary: Summary,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub estimate: Option<EstimateReport>,
    pub oracle: Option<OracleResult>,
    pub trials: Vec<TrialRecord>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::usage(format!("unknown format {other:?}; expected json or csv"))),
        }
    }
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::usage(format!("malformed report: {e}")))
    }

    /// One row per trial: id, kind, lhs, rhs, constant, margin, status.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Internal(e.to_string());
        w.write_record(["trial_id", "kind", "lhs", "rhs", "constant", "margin", "status"]).map_err(io)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for t in &self.trials {
            let status = match t.status {
                TrialStatus::Pass => "pass",
                TrialStatus::Fail => "fail",
                TrialStatus::Degenerate => "degenerate",
            };
            w.write_record([
                t.id.to_string(),
                t.kind.clone(),
                t.lhs.to_string(),
                opt(t.rhs),
                opt(t.constant),
                opt(t.margin),
                status.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn render(&self, format: OutputFormat) -> Result<Vec<u8>> {
        match format {
            OutputFormat::Json => Ok(self.to_json()?.into_bytes()),
            OutputFormat::Csv => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf)?;
                Ok(buf)
            }
        }
    }

    pub fn write_to(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.render(format)?)?;
        Ok(())
    }

    /// The report with the wall-clock field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> RunReport {
        RunReport { wall_clock_seconds: 0.0, ..self.clone() }
    }
}
