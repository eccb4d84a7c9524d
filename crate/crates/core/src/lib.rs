#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functionals;
pub mod harness;
pub mod lattice;
pub mod operators;
pub mod search;
pub mod space;
pub mod sum;
pub mod tolerance;
pub mod witness;

pub use error::{Error, Result};
pub use functionals::{enflo_pair, rademacher_pair, scaled_enflo_pair, PairReport};
pub use harness::{select_parameters, ExperimentConfig, RunReport, Task};
pub use lattice::{Estimate, GridFunction, SamplingPlan, SignVector, TorusDomain, TorusPoint};
pub use operators::{project, smooth, smoothing_bound_report};
pub use search::{brute_force_tau_oracle, maximize_rademacher_ratio, maximize_scaled_enflo_ratio, SearchBudget};
pub use space::{LpSpace, ScalarMode, Vector};
pub use witness::{build_witness, certify_t_le_2pi_tau, WitnessReport};
