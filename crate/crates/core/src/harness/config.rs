//! Experiment configuration: a flat TOML key schema.
//!
//! ```toml
//! task = "verify_theorem"   # estimate_t | estimate_tau | verify_theorem | verify_lemma21
//!                           # | verify_lemma22 | verify_chain | oracle
//! dim = 4                   # space dimension
//! p_norm = 2.0              # norm exponent, or "inf"
//! scalar_mode = "real"      # real | complexified
//! p = 2.0                   # type exponent in [1, 2]
//! n = 2
//! m = 8
//! k = 3                     # odd; verify_lemma22 / verify_chain
//! plan = "exhaustive"       # exhaustive | monte_carlo
//! samples = 4000            # monte_carlo only
//! cap = 16777216            # exhaustive enumeration cap
//! trials = 100
//! seed = 42
//! reference_t = 1.0         # type constant of the space when not known analytically
//! restarts = 20             # search tasks
//! steps = 500
//! step_scale = 0.5
//! cooling = 0.7
//! alphabet = [0.0, 1.0]     # oracle task
//! output_path = "report.json"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{SamplingPlan, DEFAULT_EXHAUSTIVE_CAP};
use crate::search::SearchBudget;
use crate::space::{check_type_exponent, LpSpace, ScalarMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    #[serde(alias = "estimate_T")]
    EstimateT,
    EstimateTau,
    VerifyTheorem,
    VerifyLemma21,
    VerifyLemma22,
    VerifyChain,
    Oracle,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::EstimateT => "estimate_t",
            Task::EstimateTau => "estimate_tau",
            Task::VerifyTheorem => "verify_theorem",
            Task::VerifyLemma21 => "verify_lemma21",
            Task::VerifyLemma22 => "verify_lemma22",
            Task::VerifyChain => "verify_chain",
            Task::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceFamily {
    Lp,
}

fn default_family() -> SpaceFamily {
    SpaceFamily::Lp
}
fn default_dim() -> usize {
    2
}
fn default_p_norm() -> PNorm {
    PNorm(2.0)
}
fn default_scalar_mode() -> ScalarMode {
    ScalarMode::Real
}
fn default_plan() -> PlanMode {
    PlanMode::Exhaustive
}
fn default_samples() -> u64 {
    4000
}
fn default_cap() -> u64 {
    DEFAULT_EXHAUSTIVE_CAP
}
fn default_trials() -> usize {
    100
}

/// Norm exponent accepting a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PNorm(pub f64);

impl Serialize for PNorm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(PNorm(v as f64)),
            Repr::Num(v) => Ok(PNorm(v)),
            Repr::Text(t) => crate::space::parse_exponent(&t).map(PNorm).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default = "default_family")]
    pub space_family: SpaceFamily,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_p_norm")]
    pub p_norm: PNorm,
    #[serde(default = "default_scalar_mode")]
    pub scalar_mode: ScalarMode,
    pub p: f64,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "default_plan")]
    pub plan: PlanMode,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reference_t: Option<f64>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub step_scale: Option<f64>,
    #[serde(default)]
    pub cooling: Option<f64>,
    #[serde(default)]
    pub alphabet: Option<Vec<f64>>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// A config with defaults for everything but the task and exponent.
    pub fn new(task: Task, p: f64) -> Self {
        ExperimentConfig {
            task,
            space_family: SpaceFamily::Lp,
            dim: default_dim(),
            p_norm: default_p_norm(),
            scalar_mode: default_scalar_mode(),
            p,
            n: None,
            m: None,
            k: None,
            plan: default_plan(),
            samples: default_samples(),
            cap: default_cap(),
            trials: default_trials(),
            seed: 0,
            reference_t: None,
            restarts: None,
            steps: None,
            step_scale: None,
            cooling: None,
            alphabet: None,
            output_path: None,
        }
    }

    pub fn space(&self) -> Result<LpSpace> {
        LpSpace::new(self.dim, self.p_norm.0, self.scalar_mode)
    }

    /// Evaluation plan; Monte Carlo draws are decorrelated from trial seeds.
    pub fn sampling_plan(&self) -> SamplingPlan {
        match self.plan {
            PlanMode::Exhaustive => SamplingPlan::Exhaustive { cap: self.cap },
            PlanMode::MonteCarlo => {
                SamplingPlan::MonteCarlo { samples: self.samples, seed: self.seed ^ 0x5851_f42d_4c95_7f2d }
            }
        }
    }

    pub fn budget(&self) -> SearchBudget {
        let d = SearchBudget::default();
        SearchBudget {
            restarts: self.restarts.unwrap_or(d.restarts),
            steps_per_restart: self.steps.unwrap_or(d.steps_per_restart),
            seed: self.seed,
            step_scale: self.step_scale.unwrap_or(d.step_scale),
            cooling: self.cooling.unwrap_or(d.cooling),
        }
    }

    pub fn require_n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(Error::Config("n must be at least 1".into())),
            None => Err(Error::Config(format!("task {} needs n", self.task.name()))),
        }
    }

    pub fn require_m(&self, quarter: bool) -> Result<usize> {
        let m = self.m.ok_or_else(|| Error::Config(format!("task {} needs m", self.task.name())))?;
        check_m(m, quarter)?;
        Ok(m)
    }

    /// Type constant used in upper-direction checks: the user's
    /// `reference_t`, else the analytic table (`T_1 = 1` for every space,
    /// `T_2(ℓ_2) = 1`).
    pub fn type_constant(&self) -> Option<f64> {
        self.reference_t.or_else(|| known_type_constant(self.p_norm.0, self.p))
    }

    pub fn require_type_constant(&self) -> Result<f64> {
        self.type_constant().ok_or_else(|| {
            Error::Config(format!(
                "no known type constant for ℓ_{} with p = {}; supply reference_t",
                self.p_norm.0, self.p
            ))
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.space().map_err(|e| Error::Config(e.to_string()))?;
        check_type_exponent(self.p).map_err(|e| Error::Config(e.to_string()))?;
        self.sampling_plan().validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(t) = self.reference_t {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Config(format!("reference_t must be positive, got {t}")));
            }
        }
        if let Some(k) = self.k {
            if k % 2 == 0 {
                return Err(Error::Config(format!("k = {k} must be odd")));
            }
        }
        if self.trials == 0 && !matches!(self.task, Task::EstimateT | Task::EstimateTau | Task::Oracle) {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        match self.task {
            Task::EstimateT => {
                self.require_n()?;
            }
            Task::EstimateTau | Task::VerifyTheorem | Task::VerifyLemma21 => {
                self.require_n()?;
                self.require_m(true)?;
            }
            Task::VerifyLemma22 => {
                self.require_n()?;
                self.require_m(false)?;
                if self.k.is_none() {
                    return Err(Error::Config("verify_lemma22 needs an odd k".into()));
                }
            }
            Task::VerifyChain => {
                self.require_n()?;
                if let Some(m) = self.m {
                    check_m(m, true)?;
                }
                self.require_type_constant()?;
            }
            Task::Oracle => {
                self.require_n()?;
                self.require_m(false)?;
                if self.alphabet.as_ref().is_none_or(|a| a.is_empty()) {
                    return Err(Error::Config("oracle needs a nonempty alphabet".into()));
                }
            }
        }
        if self.task == Task::VerifyTheorem {
            self.require_type_constant()?;
        }
        if self.task.needs_budget() {
            self.budget().validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

impl Task {
    fn needs_budget(&self) -> bool {
        matches!(self, Task::EstimateT | Task::EstimateTau)
    }
}

fn check_m(m: usize, quarter: bool) -> Result<()> {
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "m = {m} must be even: scaled Enflo type is defined on Z_m^n with m an even integer"
        )));
    }
    if quarter && !m.is_multiple_of(4) {
        return Err(Error::Config(format!(
            "m = {m} is even but not divisible by 4, which the witness shift m(1 − ε_j)/4 and the smoothing chain require"
        )));
    }
    Ok(())
}

/// Analytically known Rademacher type constants.
pub fn known_type_constant(p_norm: f64, p: f64) -> Option<f64> {
    if p == 1.0 || (p == 2.0 && p_norm == 2.0) {
        Some(1.0)
    } else {
        None
    }
}
