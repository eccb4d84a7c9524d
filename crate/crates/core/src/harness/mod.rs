//! Experiment harness: config in, report out.

pub mod config;
pub mod params;
pub mod report;
pub mod suites;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{known_type_constant, ExperimentConfig, PlanMode, Task};
pub use params::{is_admissible, select_parameters};
pub use report::{Counterexample, OutputFormat, RunReport, Summary, TrialRecord, TrialStatus, Verdict};
pub use suites::{
    recheck, verify_composite_smoothing_chain, verify_lemma21_suite, verify_lemma22_suite, verify_theorem_suite,
    SuiteOutcome,
};

use crate::error::{Error, Result};
use crate::search::{brute_force_tau_oracle, maximize_rademacher_ratio, maximize_scaled_enflo_ratio};
use crate::tolerance::harness_slack;

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub cap: Option<u64>,
    pub format: OutputFormat,
    /// Tasks the caller accepts; empty means any.
    pub allowed_tasks: Vec<Task>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if !self.allowed_tasks.is_empty() && !self.allowed_tasks.contains(&cfg.task) {
            let names: Vec<_> = self.allowed_tasks.iter().map(Task::name).collect();
            return Err(Error::usage(format!(
                "task {} is not valid here; expected one of {}",
                cfg.task.name(),
                names.join(", ")
            )));
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(cap) = self.cap {
            cfg.cap = cap;
        }
        if let Some(path) = &self.output_path {
            cfg.output_path = Some(path.clone());
        }
        Ok(())
    }
}

/// Runs the configured task and assembles its report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut estimate = None;
    let mut oracle = None;
    let outcome = if let Some(suite) = suites::suite_for(cfg) {
        suite(cfg)?
    } else {
        let n = cfg.require_n()?;
        let trials = match cfg.task {
            Task::EstimateT | Task::EstimateTau => {
                let (est, bound) = if cfg.task == Task::EstimateT {
                    let e = maximize_rademacher_ratio(&cfg.space()?, n, cfg.p, &cfg.budget(), &cfg.sampling_plan())?;
                    (e, cfg.type_constant())
                } else {
                    let m = cfg.require_m(true)?;
                    let e = maximize_scaled_enflo_ratio(
                        &cfg.space()?,
                        n,
                        m,
                        cfg.p,
                        &cfg.budget(),
                        &cfg.sampling_plan(),
                    )?;
                    (e, cfg.type_constant().map(|t| 5.0 * t))
                };
                let records = est
                    .trace
                    .iter()
                    .enumerate()
                    .map(|(i, v)| bounded_record(i, "restart", *v, bound))
                    .collect();
                estimate = Some(est);
                records
            }
            Task::Oracle => {
                let m = cfg.require_m(false)?;
                let alphabet = cfg.alphabet.as_deref().unwrap_or_default();
                let res = brute_force_tau_oracle(m, n, alphabet, cfg.p)?;
                let bound = 5.0 * cfg.reference_t.unwrap_or(1.0);
                let record = bounded_record(0, "oracle", Some(res.max_ratio), Some(bound));
                oracle = Some(res);
                vec![record]
            }
            _ => return Err(Error::Internal(format!("no runner for task {}", cfg.task.name()))),
        };
        SuiteOutcome { trials, counterexample: None, parameters: None }
    };
    let summary = Summary::from_trials(&outcome.trials);
    let verdict = if summary.failed == 0 { Verdict::Pass } else { Verdict::Fail };
    Ok(RunReport {
        schema_version: report::SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        task: cfg.task.name().to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        parameters: outcome.parameters,
        summary,
        verdict,
        counterexample: outcome.counterexample,
        estimate,
        oracle,
        trials: outcome.trials,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

fn bounded_record(id: usize, kind: &str, value: Option<f64>, bound: Option<f64>) -> TrialRecord {
    match (value, bound) {
        (None, _) => TrialRecord::degenerate(id, kind, 0.0),
        (Some(v), Some(b)) => TrialRecord::check(id, kind, v, b, Some(v), harness_slack(v, b, 0.0)),
        (Some(v), None) => TrialRecord {
            id,
            kind: kind.into(),
            lhs: v,
            rhs: None,
            constant: Some(v),
            margin: None,
            tolerance: 0.0,
            status: TrialStatus::Pass,
        },
    }
}

/// Outcome of [`run`]: the process exit code plus whatever was produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Option<RunReport>,
    pub error: Option<Error>,
}

/// Loads `config_path`, applies `overrides`, runs, and writes the report to
/// the configured output path. Exit codes: 0 pass, 1 violation, 2 usage or
/// config error, 3 capacity exceeded, 4 internal error.
pub fn run(config_path: &Path, overrides: &Overrides) -> RunOutcome {
    let result = ExperimentConfig::load(config_path).and_then(|mut cfg| {
        overrides.apply(&mut cfg)?;
        let report = run_experiment(&cfg)?;
        if let Some(path) = &cfg.output_path {
            report.write_to(path, overrides.format)?;
        }
        Ok(report)
    });
    match result {
        Ok(report) => RunOutcome { exit_code: report.exit_code(), report: Some(report), error: None },
        Err(e) => RunOutcome { exit_code: e.exit_code(), report: None, error: Some(e) },
    }
}
