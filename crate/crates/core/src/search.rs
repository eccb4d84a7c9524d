//! Lower bounds on `T_p` and `τ_p` by ratio maximization, plus an exhaustive
//! oracle for tiny scalar instances.
//!
//! Each restart is an independent hill climb driven by its own ChaCha stream
//! (stream index = restart index), so adding restarts never changes earlier
//! trajectories and results do not depend on thread scheduling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{edge_energy, rademacher_pair, scaled_enflo_pair};
use crate::lattice::{GridFunction, SamplingPlan, TorusDomain};
use crate::space::{check_type_exponent, LpSpace, Vector};
use crate::witness::build_witness;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub steps_per_restart: usize,
    pub seed: u64,
    /// Initial perturbation size, relative to the RMS coordinate.
    pub step_scale: f64,
    /// Multiplicative step decay applied after a plateau of rejected moves.
    pub cooling: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { restarts: 20, steps_per_restart: 500, seed: 0, step_scale: 0.5, cooling: 0.7 }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.steps_per_restart == 0 {
            return Err(Error::usage("search budget needs at least one restart and one step"));
        }
        if !(self.step_scale > 0.0) || !self.step_scale.is_finite() {
            return Err(Error::usage("step_scale must be positive"));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::usage("cooling must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchWitness {
    /// A vector tuple `(x_1, …, x_n)`.
    Vectors { vectors: Vec<Vec<f64>> },
    /// A grid function in row-major order.
    Grid { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub functional: String,
    pub space: LpSpace,
    pub n: usize,
    /// Torus side for τ searches; the estimate only speaks about this `(n, m)`.
    pub m: Option<usize>,
    pub exponent_p: f64,
    pub best_constant: f64,
    pub best_restart: Option<usize>,
    pub best_witness: Option<SearchWitness>,
    /// Best value reached by each restart; `None` for degenerate restarts.
    pub trace: Vec<Option<f64>>,
    pub plan: SamplingPlan,
    pub budget: SearchBudget,
}

/// A ratio objective over a flat parameter vector split into `blocks` equal
/// blocks (vectors or grid values).
trait Objective: Sync {
    fn blocks(&self) -> usize;
    /// Rescales / re-gauges in place; `false` if the point is degenerate.
    fn normalize(&self, params: &mut [f64]) -> bool;
    fn evaluate(&self, params: &[f64]) -> Option<f64>;
    fn start(&self, restart: usize, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

struct ClimbOutcome {
    params: Vec<f64>,
    value: f64,
}

fn climb<O: Objective>(obj: &O, restart: usize, budget: &SearchBudget) -> Option<ClimbOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    rng.set_stream(restart as u64);
    let mut params = obj.start(restart, &mut rng);
    if !obj.normalize(&mut params) {
        return None;
    }
    let mut value = obj.evaluate(&params)?;
    let blocks = obj.blocks();
    let block_len = params.len() / blocks;
    let plateau = blocks.max(8);
    let mut sigma = budget.step_scale;
    let mut rejected = 0;
    let mut candidate = params.clone();

    for _ in 0..budget.steps_per_restart {
        let rms = (params.iter().map(|v| v * v).sum::<f64>() / params.len() as f64).sqrt();
        let step = sigma * rms.max(f64::MIN_POSITIVE);
        candidate.copy_from_slice(&params);
        if rng.random_bool(0.5) {
            let b = rng.random_range(0..blocks);
            for v in &mut candidate[b * block_len..(b + 1) * block_len] {
                *v += step * rng.sample::<f64, _>(StandardNormal);
            }
        } else {
            let scale = step / (blocks as f64).sqrt();
            for v in candidate.iter_mut() {
                *v += scale * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let accepted = if obj.normalize(&mut candidate) {
            obj.evaluate(&candidate).filter(|&c| c > value)
        } else {
            None
        };
        if let Some(c) = accepted {
            value = c;
            std::mem::swap(&mut params, &mut candidate);
            rejected = 0;
        } else {
            rejected += 1;
            if rejected >= plateau {
                sigma *= budget.cooling;
                rejected = 0;
            }
        }
    }
    Some(ClimbOutcome { params, value })
}

/// Restart index and parameters of the best climb.
type Best = Option<(usize, Vec<f64>)>;

/// Runs all restarts and picks the best (lowest restart index on ties).
fn run_restarts<O: Objective>(obj: &O, budget: &SearchBudget) -> (Vec<Option<f64>>, Best) {
    let outcomes: Vec<Option<ClimbOutcome>> =
        (0..budget.restarts).into_par_iter().map(|r| climb(obj, r, budget)).collect();
    let trace = outcomes.iter().map(|o| o.as_ref().map(|c| c.value)).collect();
    let mut best: Option<(usize, &ClimbOutcome)> = None;
    for (r, o) in outcomes.iter().enumerate() {
        if let Some(c) = o {
            if best.is_none_or(|(_, b)| c.value > b.value) {
                best = Some((r, c));
            }
        }
    }
    (trace, best.map(|(r, c)| (r, c.params.clone())))
}

fn gaussian(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

struct RademacherObjective<'a> {
    space: &'a LpSpace,
    n: usize,
    p: f64,
    plan: &'a SamplingPlan,
}

impl RademacherObjective<'_> {
    fn vectors(&self, params: &[f64]) -> Vec<Vector> {
        params.chunks_exact(self.space.storage_len()).map(|c| Vector::new(c.to_vec())).collect()
    }
}

impl Objective for RademacherObjective<'_> {
    fn blocks(&self) -> usize {
        self.n
    }

    fn normalize(&self, params: &mut [f64]) -> bool {
        let total: f64 =
            params.chunks_exact(self.space.storage_len()).map(|c| self.space.norm_pow_slice(c, self.p)).sum();
        if !(total > 0.0) || !total.is_finite() {
            return false;
        }
        let s = total.powf(-self.p.recip());
        params.iter_mut().for_each(|v| *v *= s);
        true
    }

    fn evaluate(&self, params: &[f64]) -> Option<f64> {
        rademacher_pair(self.space, &self.vectors(params), self.p, self.plan).ok()?.derived_constant
    }

    fn start(&self, restart: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if restart == 0 {
            // standard basis tuple, cycling through the coordinates
            let d = self.space.dim();
            (0..self.n).flat_map(|j| self.space.basis(j % d).unwrap().into_coords()).collect()
        } else {
            gaussian(self.n * self.space.storage_len(), rng)
        }
    }
}

/// Lower bound on `T_p(space)` from explicit `n`-tuples of vectors.
pub fn maximize_rademacher_ratio(
    space: &LpSpace,
    n: usize,
    p: f64,
    budget: &SearchBudget,
    plan: &SamplingPlan,
) -> Result<EstimateReport> {
    check_type_exponent(p)?;
    budget.validate()?;
    plan.validate()?;
    if n == 0 {
        return Err(Error::usage("need at least one vector"));
    }
    let obj = RademacherObjective { space, n, p, plan };
    // surfaces capacity errors before the search swallows them
    rademacher_pair(space, &obj.vectors(&obj.start(0, &mut ChaCha8Rng::seed_from_u64(0))), p, plan)?;
    let (trace, best) = run_restarts(&obj, budget);
    let (best_restart, best_witness, best_constant) = match best {
        Some((r, params)) => {
            let vectors = obj.vectors(&params);
            let value = rademacher_pair(space, &vectors, p, plan)?.derived_constant.unwrap_or(0.0);
            let witness = SearchWitness::Vectors { vectors: vectors.into_iter().map(Vector::into_coords).collect() };
            (Some(r), Some(witness), value)
        }
        None => (None, None, 0.0),
    };
    Ok(EstimateReport {
        functional: "rademacher".into(),
        space: *space,
        n,
        m: None,
        exponent_p: p,
        best_constant,
        best_restart,
        best_witness,
        trace,
        plan: *plan,
        budget: *budget,
    })
}

struct TauObjective<'a> {
    space: &'a LpSpace,
    domain: TorusDomain,
    p: f64,
    plan: &'a SamplingPlan,
    points: usize,
}

impl TauObjective<'_> {
    fn grid(&self, params: &[f64]) -> GridFunction {
        GridFunction::from_parts_unchecked(self.domain, *self.space, params.to_vec())
    }

    /// The exponential witness, realized with real rotations on coordinate
    /// pairs when the space is real.
    fn analytic_start(&self) -> Vec<f64> {
        let n = self.domain.n();
        let d = self.space.dim();
        if self.space.is_complex() {
            let vs: Vec<Vector> = (0..n).map(|j| self.space.basis(j % d).unwrap()).collect();
            return build_witness(self.space, &vs, &self.domain).unwrap().values().to_vec();
        }
        let m = self.domain.m() as f64;
        let mut values = vec![0.0; self.points * d];
        for x in 0..self.points {
            let out = &mut values[x * d..(x + 1) * d];
            for j in 0..n {
                let theta = 2.0 * PI * self.domain.coord_of(x, j) as f64 / m;
                out[(2 * j) % d] += theta.cos();
                if d > 1 {
                    out[(2 * j + 1) % d] += theta.sin();
                }
            }
        }
        values
    }
}

impl Objective for TauObjective<'_> {
    fn blocks(&self) -> usize {
        self.points
    }

    fn normalize(&self, params: &mut [f64]) -> bool {
        let len = self.space.storage_len();
        let origin = params[..len].to_vec();
        for chunk in params.chunks_exact_mut(len) {
            chunk.iter_mut().zip(&origin).for_each(|(v, o)| *v -= o);
        }
        let rhs = match edge_energy(&self.grid(params), self.p, &SamplingPlan::exhaustive()) {
            Ok(e) => e.mean,
            Err(_) => return false,
        };
        if !(rhs > 0.0) || !rhs.is_finite() {
            return false;
        }
        let s = rhs.powf(-self.p.recip());
        params.iter_mut().for_each(|v| *v *= s);
        true
    }

    fn evaluate(&self, params: &[f64]) -> Option<f64> {
        scaled_enflo_pair(&self.grid(params), self.p, self.plan).ok()?.derived_constant
    }

    fn start(&self, restart: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if restart == 0 {
            self.analytic_start()
        } else {
            gaussian(self.points * self.space.storage_len(), rng)
        }
    }
}

/// Lower bound on `τ_p(space)` at the fixed torus `ℤ_m^n`, from explicit
/// grid functions. Requires `4 | m`.
pub fn maximize_scaled_enflo_ratio(
    space: &LpSpace,
    n: usize,
    m: usize,
    p: f64,
    budget: &SearchBudget,
    plan: &SamplingPlan,
) -> Result<EstimateReport> {
    check_type_exponent(p)?;
    budget.validate()?;
    plan.validate()?;
    let domain = TorusDomain::new(n, m)?;
    if !m.is_multiple_of(4) {
        return Err(Error::usage(format!("τ search needs m divisible by 4, got {m}")));
    }
    let points = domain.point_count()?;
    let obj = TauObjective { space, domain, p, plan, points };
    scaled_enflo_pair(&obj.grid(&obj.analytic_start()), p, plan)?;
    let (trace, best) = run_restarts(&obj, budget);
    let (best_restart, best_witness, best_constant) = match best {
        Some((r, params)) => {
            let value = scaled_enflo_pair(&obj.grid(&params), p, plan)?.derived_constant.unwrap_or(0.0);
            (Some(r), Some(SearchWitness::Grid { values: params }), value)
        }
        None => (None, None, 0.0),
    };
    Ok(EstimateReport {
        functional: "scaled_enflo".into(),
        space: *space,
        n,
        m: Some(m),
        exponent_p: p,
        best_constant,
        best_restart,
        best_witness,
        trace,
        plan: *plan,
        budget: *budget,
    })
}

/// Maximum enumeration size of [`brute_force_tau_oracle`].
pub const ORACLE_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Largest τ-ratio found; 0 when every function is constant.
    pub max_ratio: f64,
    /// First maximizer in enumeration order, as values in row-major order.
    pub argmax: Option<Vec<f64>>,
    pub functions: u64,
    pub degenerate: u64,
}

/// Exact maximum of the τ-ratio over all functions `ℤ_m^n → alphabet ⊂ ℝ`.
///
/// Written against the definition directly (explicit coordinates, explicit
/// sign averaging), sharing no evaluation code with the functionals.
pub fn brute_force_tau_oracle(m: usize, n: usize, alphabet: &[f64], p: f64) -> Result<OracleResult> {
    if n == 0 || m == 0 || !m.is_multiple_of(2) {
        return Err(Error::usage(format!("oracle needs n ≥ 1 and even m, got n = {n}, m = {m}")));
    }
    if alphabet.is_empty() || alphabet.iter().any(|a| !a.is_finite()) {
        return Err(Error::usage("oracle alphabet must be a nonempty set of finite reals"));
    }
    if !(p >= 1.0) {
        return Err(Error::usage(format!("oracle needs p ≥ 1, got {p}")));
    }
    let points = (m as u64)
        .checked_pow(n as u32)
        .filter(|&c| c <= 64)
        .ok_or_else(|| Error::Capacity(format!("{m}^{n} points is too many for the oracle")))?
        as usize;
    let a = alphabet.len() as u64;
    let total = a
        .checked_pow(points as u32)
        .filter(|&t| t <= ORACLE_CAP)
        .ok_or_else(|| Error::Capacity(format!("{}^{points} functions exceeds the oracle cap {ORACLE_CAP}", a)))?;

    let coords: Vec<Vec<usize>> = (0..points)
        .map(|mut i| {
            let mut c = vec![0; n];
            for slot in c.iter_mut().rev() {
                *slot = i % m;
                i /= m;
            }
            c
        })
        .collect();
    let index = |c: &[usize]| c.iter().fold(0, |acc, &v| acc * m + v);
    let moved = |x: usize, delta: &dyn Fn(usize) -> i64| {
        let c: Vec<usize> =
            coords[x].iter().enumerate().map(|(j, &v)| (v as i64 + delta(j)).rem_euclid(m as i64) as usize).collect();
        index(&c)
    };
    let half = (m / 2) as i64;
    let signs = 1u32 << n;
    // diagonal[x][s]: index of x + (m/2)ε for sign pattern s
    let diagonal: Vec<Vec<usize>> = (0..points)
        .map(|x| {
            (0..signs)
                .map(|s| moved(x, &|j| if s >> j & 1 == 1 { -half } else { half }))
                .collect()
        })
        .collect();
    let edges: Vec<Vec<usize>> =
        (0..points).map(|x| (0..n).map(|e| moved(x, &|j| i64::from(j == e))).collect()).collect();
    let mp = (m as f64).powf(p);

    let mut best = 0.0;
    let mut argmax = None;
    let mut degenerate = 0;
    let mut digits = vec![0usize; points];
    for code in 0..total {
        let mut c = code;
        for d in digits.iter_mut().rev() {
            *d = (c % a) as usize;
            c /= a;
        }
        let f = |x: usize| alphabet[digits[x]];
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for x in 0..points {
            for &y in &diagonal[x] {
                lhs += (f(y) - f(x)).abs().powf(p);
            }
            for &y in &edges[x] {
                rhs += (f(y) - f(x)).abs().powf(p);
            }
        }
        lhs /= (points as u64 * u64::from(signs)) as f64;
        rhs /= points as f64;
        if rhs == 0.0 {
            degenerate += 1;
            continue;
        }
        let ratio = (lhs / (mp * rhs)).powf(p.recip());
        if ratio > best || argmax.is_none() {
            best = ratio;
            argmax = Some(digits.iter().map(|&d| alphabet[d]).collect());
        }
    }
    Ok(OracleResult { max_ratio: best, argmax, functions: total, degenerate })
}
