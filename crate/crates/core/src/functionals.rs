//! Both sides of the Rademacher, Enflo and scaled Enflo type inequalities.
//!
//! Every functional returns a [`PairReport`]; the derived constant is the
//! smallest constant for which the inequality holds on that one instance,
//! i.e. a lower bound on the type constant of the space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, Estimate, GridFunction, SamplingPlan, SignVector};
use crate::space::{check_type_exponent, LpSpace, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub lhs: f64,
    pub rhs_raw: f64,
    pub exponent_p: f64,
    /// Multiplier of `rhs_raw` in the inequality (1, or `m^p` for scaled Enflo).
    pub scale: f64,
    /// `(lhs / (scale · rhs_raw))^{1/p}`; `None` when the right side vanishes.
    pub derived_constant: Option<f64>,
    pub lhs_error: f64,
    pub rhs_error: f64,
}

impl PairReport {
    pub fn new(lhs: Estimate, rhs_raw: Estimate, exponent_p: f64, scale: f64) -> Self {
        let denom = scale * rhs_raw.mean;
        let derived_constant = (denom > 0.0).then(|| (lhs.mean / denom).powf(exponent_p.recip()));
        PairReport {
            lhs: lhs.mean,
            rhs_raw: rhs_raw.mean,
            exponent_p,
            scale,
            derived_constant,
            lhs_error: lhs.std_error,
            rhs_error: rhs_raw.std_error,
        }
    }

    /// `scale · rhs_raw − lhs`; nonnegative iff the instance satisfies the
    /// inequality with constant 1 in front of `scale`.
    pub fn bound_margin(&self) -> f64 {
        self.scale * self.rhs_raw - self.lhs
    }

    /// Combined standard error of `scale · rhs_raw − lhs`.
    pub fn combined_error(&self) -> f64 {
        (self.lhs_error.powi(2) + (self.scale * self.rhs_error).powi(2)).sqrt()
    }

    pub fn is_exact(&self) -> bool {
        self.lhs_error == 0.0 && self.rhs_error == 0.0
    }
}

/// `E_ε ‖Σ ε_j x_j‖^p` against `Σ ‖x_j‖^p`.
pub fn rademacher_pair(space: &LpSpace, vectors: &[Vector], p: f64, plan: &SamplingPlan) -> Result<PairReport> {
    check_type_exponent(p)?;
    if vectors.is_empty() {
        return Err(Error::usage("rademacher_pair needs at least one vector"));
    }
    for v in vectors {
        space.check(v)?;
    }
    let lhs = rademacher_average(space, vectors, p, plan)?;
    let rhs: Vec<f64> = vectors.iter().map(|v| space.norm_pow_slice(v.coords(), p)).collect();
    Ok(PairReport::new(lhs, Estimate::exact(crate::sum::tree_sum(&rhs)), p, 1.0))
}

/// `E_ε ‖Σ ε_j x_j‖^p` with no range restriction on `p`. Vectors are assumed
/// validated.
pub(crate) fn rademacher_average(
    space: &LpSpace,
    vectors: &[Vector],
    p: f64,
    plan: &SamplingPlan,
) -> Result<Estimate> {
    let len = space.storage_len();
    lattice::expect_signs(vectors.len(), plan, |eps| {
        let mut acc = vec![0.0; len];
        for (j, v) in vectors.iter().enumerate() {
            crate::space::axpy(eps.sign(j), v.coords(), &mut acc);
        }
        space.norm_pow_slice(&acc, p)
    })
}

/// Enflo functional on the Hamming cube.
///
/// `table[i]` is `f(ε)` where bit `j` of `i` is set iff `ε_j = −1`. Compares
/// `E_ε ‖f(ε) − f(−ε)‖^p` with `Σ_j E_ε ‖f(ε) − f(ε with ε_j negated)‖^p`;
/// the derived constant is the instance's Enflo constant `K`.
pub fn enflo_pair(space: &LpSpace, table: &[Vector], p: f64, plan: &SamplingPlan) -> Result<PairReport> {
    check_type_exponent(p)?;
    if table.len() < 2 || !table.len().is_power_of_two() {
        return Err(Error::usage(format!(
            "Enflo table length {} is not a power of two (at least 2)",
            table.len()
        )));
    }
    for v in table {
        space.check(v)?;
    }
    let n = table.len().trailing_zeros() as usize;
    let at = |e: SignVector| table[e.mask() as usize].coords();
    // Same plan and seed: both expectations see the same sign draws.
    let lhs = lattice::expect_signs(n, plan, |e| space.norm_diff_pow(at(e), at(e.negated()), p))?;
    let rhs = lattice::expect_signs(n, plan, |e| {
        let here = at(e);
        (0..n).map(|j| space.norm_diff_pow(here, at(e.flipped(j)), p)).sum()
    })?;
    Ok(PairReport::new(lhs, rhs, p, 1.0))
}

/// `Σ_j ∫ ‖f(x + e_j) − f(x)‖^p dμ(x)`.
pub fn edge_energy(f: &GridFunction, p: f64, plan: &SamplingPlan) -> Result<Estimate> {
    let d = f.domain();
    let space = f.space();
    lattice::integrate_torus_index(d, plan, |x| edge_term(f, space, x, p))
}

fn edge_term(f: &GridFunction, space: &LpSpace, x: usize, p: f64) -> f64 {
    let d = f.domain();
    let here = f.value(x);
    (0..d.n()).map(|j| space.norm_diff_pow(f.value(d.step_index(x, j, 1)), here, p)).sum()
}

/// `E_ε ∫ ‖f(x + (m/2)ε) − f(x)‖^p dμ(x)`.
pub fn half_shift_energy(f: &GridFunction, p: f64, plan: &SamplingPlan) -> Result<Estimate> {
    let [lhs] = lattice::estimate_joint(f.domain(), plan, |x, e| [half_shift_term(f, x, e, p)])?;
    Ok(lhs)
}

fn half_shift_term(f: &GridFunction, x: usize, e: SignVector, p: f64) -> f64 {
    f.space().norm_diff_pow(f.value(f.domain().half_shift_index(x, e)), f.value(x), p)
}

/// Scaled Enflo functional on ℤ_m^n; the derived constant is the τ-ratio
/// `(lhs / (m^p · rhs_raw))^{1/p}`.
///
/// Monte Carlo plans draw `(x, ε)` jointly and evaluate the diagonal term and
/// all `n` edge terms at the same `x`.
pub fn scaled_enflo_pair(f: &GridFunction, p: f64, plan: &SamplingPlan) -> Result<PairReport> {
    check_type_exponent(p)?;
    let d = f.domain();
    let scale = (d.m() as f64).powf(p);
    let space = f.space();
    match plan {
        SamplingPlan::Exhaustive { .. } => {
            let lhs = half_shift_energy(f, p, plan)?;
            let rhs = edge_energy(f, p, plan)?;
            if rhs.mean == 0.0 && lhs.mean > 0.0 {
                return Err(Error::Internal(
                    "grid function has zero edge energy but nonzero half-shift energy".into(),
                ));
            }
            Ok(PairReport::new(lhs, rhs, p, scale))
        }
        SamplingPlan::MonteCarlo { .. } => {
            let [lhs, rhs] =
                lattice::estimate_joint(d, plan, |x, e| [half_shift_term(f, x, e, p), edge_term(f, space, x, p)])?;
            Ok(PairReport::new(lhs, rhs, p, scale))
        }
    }
}

/// Upper-direction margin `5·reference_t − τ_est`.
pub fn theorem_margin(pair: &PairReport, reference_t: f64) -> Result<f64> {
    let tau = pair
        .derived_constant
        .ok_or_else(|| Error::usage("theorem margin of a degenerate pair (undefined constant)"))?;
    if !(reference_t > 0.0) {
        return Err(Error::usage(format!("reference type constant must be positive, got {reference_t}")));
    }
    Ok(5.0 * reference_t - tau)
}
