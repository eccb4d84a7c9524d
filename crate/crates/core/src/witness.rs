//! The exponential witness `f(x) = Σ_j e^{2πi x_j/m} v_j` and the identity
//! chain showing that Rademacher averages of `(v_j)` are controlled by the
//! scaled Enflo ratio of `f`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{edge_energy, half_shift_energy, rademacher_average};
use crate::lattice::{self, Estimate, GridFunction, SamplingPlan, TorusDomain};
use crate::space::{axpy, check_type_exponent, rotate_pairs, LpSpace, Vector};
use crate::sum::tree_sum;
use crate::tolerance::{identity_holds, witness_le};

/// `e^{2πi r/m}` with exact values at quarter turns and exact negation
/// between `r` and `r + m/2`.
pub fn unit_root(r: usize, m: usize) -> (f64, f64) {
    let r = r % m;
    if m.is_multiple_of(4) && r.is_multiple_of(m / 4) {
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][r / (m / 4)];
    }
    if m.is_multiple_of(2) && r >= m / 2 {
        let (c, s) = unit_root(r - m / 2, m);
        return (-c, -s);
    }
    let (s, c) = (2.0 * PI * r as f64 / m as f64).sin_cos();
    (c, s)
}

/// Precomputed rotations `e^{2πi r/m} v_j` for every `j` and residue `r`.
struct RotationTable {
    stride: usize,
    m: usize,
    data: Vec<f64>,
}

impl RotationTable {
    fn new(vectors: &[Vector], m: usize) -> Self {
        let stride = vectors.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(vectors.len() * m * stride);
        for v in vectors {
            for r in 0..m {
                let (c, s) = unit_root(r, m);
                data.extend(rotate_pairs(v.coords(), c, s));
            }
        }
        RotationTable { stride, m, data }
    }

    fn get(&self, j: usize, r: usize) -> &[f64] {
        let at = (j * self.m + r) * self.stride;
        &self.data[at..at + self.stride]
    }
}

fn check_inputs(space: &LpSpace, vectors: &[Vector], domain: &TorusDomain) -> Result<()> {
    if !space.is_complex() {
        return Err(Error::usage("the exponential witness needs a complexified space"));
    }
    if vectors.len() != domain.n() {
        return Err(Error::usage(format!(
            "{} witness vectors for a torus of dimension {}",
            vectors.len(),
            domain.n()
        )));
    }
    vectors.iter().try_for_each(|v| space.check(v))
}

fn check_quarter(domain: &TorusDomain) -> Result<()> {
    if !domain.m().is_multiple_of(4) {
        return Err(Error::usage(format!(
            "m = {} must be divisible by 4 (the shift m(1 − ε_j)/4 must be an integer)",
            domain.m()
        )));
    }
    Ok(())
}

/// `f(x) = Σ_j e^{2πi x_j/m} v_j` tabulated on the torus.
pub fn build_witness(space: &LpSpace, vectors: &[Vector], domain: &TorusDomain) -> Result<GridFunction> {
    check_inputs(space, vectors, domain)?;
    let table = RotationTable::new(vectors, domain.m());
    let count = domain.point_count()?;
    let len = space.storage_len();
    let mut values = vec![0.0; count * len];
    for (x, out) in values.chunks_exact_mut(len).enumerate() {
        for j in 0..domain.n() {
            axpy(1.0, table.get(j, domain.coord_of(x, j)), out);
        }
    }
    GridFunction::new(*domain, *space, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCheck {
    /// `Σ_j ∫ ‖f(x + e_j) − f(x)‖^p dμ` of the witness.
    pub edge_sum: f64,
    /// `|e^{2πi/m} − 1|^p`.
    pub edge_factor: f64,
    /// `Σ_j ‖v_j‖^p`.
    pub vector_norm_sum: f64,
    /// `(2π/m)^p Σ_j ‖v_j‖^p`.
    pub upper_bound: f64,
    pub identity_ok: bool,
    pub bound_ok: bool,
}

impl EdgeCheck {
    pub fn ok(&self) -> bool {
        self.identity_ok && self.bound_ok
    }
}

/// Edge energy of the witness equals `|e^{2πi/m} − 1|^p Σ ‖v_j‖^p` and is at
/// most `(2π/m)^p Σ ‖v_j‖^p`.
pub fn check_edge_identity(
    space: &LpSpace,
    vectors: &[Vector],
    domain: &TorusDomain,
    p: f64,
    plan: &SamplingPlan,
) -> Result<EdgeCheck> {
    let f = build_witness(space, vectors, domain)?;
    edge_check_on(&f, space, vectors, p, plan)
}

fn edge_check_on(f: &GridFunction, space: &LpSpace, vectors: &[Vector], p: f64, plan: &SamplingPlan) -> Result<EdgeCheck> {
    let m = f.domain().m() as f64;
    let edge = edge_energy(f, p, plan)?;
    let norms: Vec<f64> = vectors.iter().map(|v| space.norm_pow_slice(v.coords(), p)).collect();
    let vector_norm_sum = tree_sum(&norms);
    let edge_factor = (2.0 * (PI / m).sin()).powf(p);
    let upper_bound = (2.0 * PI / m).powf(p) * vector_norm_sum;
    Ok(EdgeCheck {
        edge_sum: edge.mean,
        edge_factor,
        vector_norm_sum,
        upper_bound,
        identity_ok: identity_holds(edge.mean, edge_factor * vector_norm_sum, edge.std_error),
        bound_ok: witness_le(edge.mean, upper_bound, edge.std_error),
    })
}

/// `E_ε ∫ ‖f(x + (m/2)ε) − f(x)‖^p dμ = 2^p ∫ ‖f(x)‖^p dμ` for the witness.
/// `rhs` is the right side, `2^p` times the symmetric integral.
pub fn check_half_shift_identity(
    space: &LpSpace,
    vectors: &[Vector],
    domain: &TorusDomain,
    p: f64,
    plan: &SamplingPlan,
) -> Result<Check> {
    let f = build_witness(space, vectors, domain)?;
    let (check, _) = half_shift_check_on(&f, p, plan)?;
    Ok(check)
}

fn half_shift_check_on(f: &GridFunction, p: f64, plan: &SamplingPlan) -> Result<(Check, Estimate)> {
    let lhs = half_shift_energy(f, p, plan)?;
    let sym = witness_integral(f, p, plan)?;
    let rhs = 2f64.powf(p) * sym.mean;
    let se = (lhs.std_error.powi(2) + (2f64.powf(p) * sym.std_error).powi(2)).sqrt();
    Ok((Check { lhs: lhs.mean, rhs, ok: identity_holds(lhs.mean, rhs, se) }, sym))
}

/// `∫ ‖f(x)‖^p dμ`.
fn witness_integral(f: &GridFunction, p: f64, plan: &SamplingPlan) -> Result<Estimate> {
    lattice::integrate_torus_index(f.domain(), plan, |x| f.space().norm_pow_slice(f.value(x), p))
}

/// `E_ε ‖Σ ε_j a_j v_j‖^p ≤ (max |a_j|)^p E_ε ‖Σ ε_j v_j‖^p`.
pub fn check_contraction_principle(
    space: &LpSpace,
    vectors: &[Vector],
    coeffs: &[f64],
    p: f64,
    plan: &SamplingPlan,
) -> Result<Check> {
    if !(p >= 1.0) {
        return Err(Error::usage(format!("contraction principle needs p ≥ 1, got {p}")));
    }
    if coeffs.len() != vectors.len() {
        return Err(Error::usage(format!("{} coefficients for {} vectors", coeffs.len(), vectors.len())));
    }
    if vectors.is_empty() {
        return Err(Error::usage("contraction principle needs at least one vector"));
    }
    vectors.iter().try_for_each(|v| space.check(v))?;
    if let Some(bad) = coeffs.iter().find(|a| !a.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite coefficient {bad}")));
    }
    let weighted: Vec<Vector> = vectors.iter().zip(coeffs).map(|(v, a)| v.scaled(*a)).collect();
    let lhs = rademacher_average(space, &weighted, p, plan)?;
    let base = rademacher_average(space, vectors, p, plan)?;
    let amax = coeffs.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
    let factor = amax.powf(p);
    let se = (lhs.std_error.powi(2) + (factor * base.std_error).powi(2)).sqrt();
    let rhs = factor * base.mean;
    Ok(Check { lhs: lhs.mean, rhs, ok: witness_le(lhs.mean, rhs, se) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationCheck {
    /// `∫ ‖Σ_j e^{2πi x_j/m} v_j‖^p dμ`.
    pub sym_integral: f64,
    /// `∫ E_ε ‖Σ_j ε_j e^{2πi x_j/m} v_j‖^p dμ`.
    pub signed_integral: f64,
    /// `E_ε ‖Σ_j ε_j v_j‖^p`.
    pub rademacher_lhs: f64,
    /// `signed_integral = sym_integral`.
    pub identity_ok: bool,
    /// `sym_integral ≥ 2^{−p} rademacher_lhs`.
    pub bound_ok: bool,
}

impl SymmetrizationCheck {
    pub fn ok(&self) -> bool {
        self.identity_ok && self.bound_ok
    }
}

/// Random signs are absorbed by the shift `x_j ↦ x_j + m(1 − ε_j)/4`, and the
/// resulting integral dominates `2^{−p} E_ε ‖Σ ε_j v_j‖^p`. Requires `4 | m`.
pub fn check_symmetrization(
    space: &LpSpace,
    vectors: &[Vector],
    domain: &TorusDomain,
    p: f64,
    plan: &SamplingPlan,
) -> Result<SymmetrizationCheck> {
    check_quarter(domain)?;
    let f = build_witness(space, vectors, domain)?;
    let sym = witness_integral(&f, p, plan)?;
    symmetrization_on(&f, space, vectors, sym, p, plan)
}

fn symmetrization_on(
    f: &GridFunction,
    space: &LpSpace,
    vectors: &[Vector],
    sym: Estimate,
    p: f64,
    plan: &SamplingPlan,
) -> Result<SymmetrizationCheck> {
    let domain = f.domain();
    let table = RotationTable::new(vectors, domain.m());
    let len = space.storage_len();
    let [signed] = lattice::estimate_joint(domain, plan, |x, e| {
        let mut acc = vec![0.0; len];
        for j in 0..domain.n() {
            axpy(e.sign(j), table.get(j, domain.coord_of(x, j)), &mut acc);
        }
        [space.norm_pow_slice(&acc, p)]
    })?;
    let rad = rademacher_average(space, vectors, p, plan)?;
    let scale = 2f64.powf(-p);
    let se_a = (sym.std_error.powi(2) + signed.std_error.powi(2)).sqrt();
    let se_b = (sym.std_error.powi(2) + (scale * rad.std_error).powi(2)).sqrt();
    Ok(SymmetrizationCheck {
        sym_integral: sym.mean,
        signed_integral: signed.mean,
        rademacher_lhs: rad.mean,
        identity_ok: identity_holds(signed.mean, sym.mean, se_a),
        bound_ok: witness_le(scale * rad.mean, sym.mean, se_b),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub n: usize,
    pub m: usize,
    pub exponent_p: f64,
    pub edge_sum: f64,
    pub edge_factor: f64,
    pub vector_norm_sum: f64,
    pub edge_upper_bound: f64,
    pub half_shift_lhs: f64,
    pub sym_integral: f64,
    pub signed_integral: f64,
    pub rademacher_lhs: f64,
    /// `(rademacher_lhs / Σ‖v_j‖^p)^{1/p}`, the Rademacher ratio of `(v_j)`.
    pub rademacher_constant: Option<f64>,
    /// τ-ratio of the witness, a lower bound on the scaled Enflo constant at this `(n, m)`.
    pub witness_tau: Option<f64>,
    /// `rademacher_constant / 2π`.
    pub tau_lower_from_t: Option<f64>,
    pub edge_identity_ok: bool,
    pub edge_bound_ok: bool,
    pub half_shift_ok: bool,
    pub symmetrization_identity_ok: bool,
    pub symmetrization_bound_ok: bool,
    /// `rademacher_constant ≤ 2π · witness_tau`.
    pub final_ok: bool,
    pub chain_ok: bool,
}

impl WitnessReport {
    pub fn is_degenerate(&self) -> bool {
        self.rademacher_constant.is_none() || self.witness_tau.is_none()
    }

    /// `2π · witness_tau − rademacher_constant`, when both are defined.
    pub fn margin(&self) -> Option<f64> {
        Some(2.0 * PI * self.witness_tau? - self.rademacher_constant?)
    }
}

/// Runs the full chain for the vectors `(v_j)`: the Rademacher ratio of the
/// tuple is at most `2π` times the τ-ratio of its exponential witness.
/// Real vectors are lifted to the complexification first.
pub fn certify_t_le_2pi_tau(
    space: &LpSpace,
    vectors: &[Vector],
    p: f64,
    domain: &TorusDomain,
    plan: &SamplingPlan,
) -> Result<WitnessReport> {
    check_type_exponent(p)?;
    check_quarter(domain)?;
    let lifted: Vec<Vector> = vectors.iter().map(|v| space.lift(v)).collect::<Result<_>>()?;
    let cspace = space.complexify();
    let f = build_witness(&cspace, &lifted, domain)?;

    let edge = edge_check_on(&f, &cspace, &lifted, p, plan)?;
    let (half, sym) = half_shift_check_on(&f, p, plan)?;
    let symm = symmetrization_on(&f, &cspace, &lifted, sym, p, plan)?;

    let inv_p = p.recip();
    let rademacher_constant =
        (edge.vector_norm_sum > 0.0).then(|| (symm.rademacher_lhs / edge.vector_norm_sum).powf(inv_p));
    let m_p = (domain.m() as f64).powf(p);
    let witness_tau = (edge.edge_sum > 0.0).then(|| (half.lhs / (m_p * edge.edge_sum)).powf(inv_p));
    let final_ok = match (rademacher_constant, witness_tau) {
        (Some(t), Some(tau)) => witness_le(t, 2.0 * PI * tau, 0.0),
        (None, None) => true,
        // one side degenerate while the other is not cannot happen for a witness
        _ => false,
    };
    let chain_ok = edge.ok() && half.ok && symm.ok() && final_ok;
    Ok(WitnessReport {
        n: domain.n(),
        m: domain.m(),
        exponent_p: p,
        edge_sum: edge.edge_sum,
        edge_factor: edge.edge_factor,
        vector_norm_sum: edge.vector_norm_sum,
        edge_upper_bound: edge.upper_bound,
        half_shift_lhs: half.lhs,
        sym_integral: symm.sym_integral,
        signed_integral: symm.signed_integral,
        rademacher_lhs: symm.rademacher_lhs,
        rademacher_constant,
        witness_tau,
        tau_lower_from_t: rademacher_constant.map(|t| t / (2.0 * PI)),
        edge_identity_ok: edge.identity_ok,
        edge_bound_ok: edge.bound_ok,
        half_shift_ok: half.ok,
        symmetrization_identity_ok: symm.identity_ok,
        symmetrization_bound_ok: symm.bound_ok,
        final_ok,
        chain_ok,
    })
}
