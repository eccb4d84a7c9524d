//! The discrete torus ℤ_m^n, sign vectors, structured offset sets, grid
//! functions, and evaluation of uniform expectations over signs and points.
//!
//! Grid functions are stored row-major: the last coordinate varies fastest.
//! Expectations are computed either exhaustively or by seeded Monte Carlo;
//! every sample `s` of a Monte Carlo plan draws from its own ChaCha stream
//! `s`, so results do not depend on how samples are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{LpSpace, Vector};
use crate::sum::{tree_sum, tree_sum_by};

/// Default bound on the number of evaluations of an exhaustive plan.
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusDomain {
    n: usize,
    m: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<usize>,
}

/// `ε ∈ {−1, 1}^n`, stored as the bitmask of negative coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignVector {
    n: usize,
    negative: u64,
}

impl TorusDomain {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("torus dimension n must be at least 1"));
        }
        if m == 0 || !m.is_multiple_of(2) {
            return Err(Error::usage(format!(
                "torus side m = {m} must be a positive even integer (scaled Enflo type is defined on Z_m^n for even m)"
            )));
        }
        Ok(TorusDomain { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `m^n`, or a capacity error when it does not fit in `usize`.
    pub fn point_count(&self) -> Result<usize> {
        u32::try_from(self.n)
            .ok()
            .and_then(|n| self.m.checked_pow(n))
            .ok_or_else(|| Error::Capacity(format!("{}^{} points do not fit in memory", self.m, self.n)))
    }

    /// Row-major stride (in points) of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.m.pow((self.n - 1 - axis) as u32)
    }

    pub fn point(&self, coords: Vec<usize>) -> Result<TorusPoint> {
        if coords.len() != self.n {
            return Err(Error::usage(format!("point has {} coordinates, torus has {}", coords.len(), self.n)));
        }
        Ok(TorusPoint { coords: coords.into_iter().map(|c| c % self.m).collect() })
    }

    pub fn index_of(&self, x: &TorusPoint) -> usize {
        x.coords.iter().fold(0, |acc, &c| acc * self.m + c)
    }

    pub fn point_at(&self, mut index: usize) -> TorusPoint {
        let mut coords = vec![0; self.n];
        for c in coords.iter_mut().rev() {
            *c = index % self.m;
            index /= self.m;
        }
        TorusPoint { coords }
    }

    /// Coordinate `axis` of the point with the given row-major index.
    pub fn coord_of(&self, index: usize, axis: usize) -> usize {
        (index / self.stride(axis)) % self.m
    }

    /// `(x + offset) mod m`, coordinatewise.
    pub fn shift(&self, x: &TorusPoint, offset: &[i64]) -> Result<TorusPoint> {
        if x.coords.len() != self.n || offset.len() != self.n {
            return Err(Error::usage(format!(
                "shift of a {}-point by a {}-offset on a torus of dimension {}",
                x.coords.len(),
                offset.len(),
                self.n
            )));
        }
        let coords = x.coords.iter().zip(offset).map(|(&c, &o)| self.wrap(c as i64 + o)).collect();
        Ok(TorusPoint { coords })
    }

    /// Index of `x + delta·e_axis`.
    pub fn step_index(&self, index: usize, axis: usize, delta: i64) -> usize {
        let stride = self.stride(axis);
        let c = (index / stride) % self.m;
        let shifted = self.wrap(c as i64 + delta);
        index - c * stride + shifted * stride
    }

    /// Index of `x + offset`.
    pub fn offset_index(&self, index: usize, offset: &[i64]) -> usize {
        let mut out = 0;
        for (axis, &o) in offset.iter().enumerate() {
            let c = self.coord_of(index, axis);
            out = out * self.m + self.wrap(c as i64 + o);
        }
        out
    }

    /// Index of `x + (m/2)·ε`. Since `m/2 ≡ −m/2 (mod m)` this is the same
    /// point for every ε, but the sign is still applied literally.
    pub fn half_shift_index(&self, index: usize, eps: SignVector) -> usize {
        let half = (self.m / 2) as i64;
        let mut out = 0;
        for axis in 0..self.n {
            let c = self.coord_of(index, axis);
            out = out * self.m + self.wrap(c as i64 + half * eps.sign_i64(axis));
        }
        out
    }

    pub(crate) fn wrap(&self, v: i64) -> usize {
        v.rem_euclid(self.m as i64) as usize
    }
}

impl TorusPoint {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl SignVector {
    pub fn from_mask(n: usize, negative: u64) -> Self {
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        SignVector { n, negative: negative & mask }
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        if signs.len() > 64 {
            return Err(Error::usage("sign vectors are limited to 64 coordinates"));
        }
        let mut negative = 0;
        for (j, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => negative |= 1 << j,
                other => return Err(Error::usage(format!("sign entries must be ±1, got {other}"))),
            }
        }
        Ok(SignVector { n: signs.len(), negative })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mask(&self) -> u64 {
        self.negative
    }

    pub fn sign(&self, j: usize) -> f64 {
        if self.negative >> j & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn sign_i64(&self, j: usize) -> i64 {
        if self.negative >> j & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn signs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.sign(j)).collect()
    }

    /// `−ε`.
    pub fn negated(&self) -> Self {
        SignVector::from_mask(self.n, !self.negative)
    }

    /// ε with coordinate `j` negated.
    pub fn flipped(&self, j: usize) -> Self {
        SignVector { n: self.n, negative: self.negative ^ (1 << j) }
    }
}

/// All n-tuples of even integers of absolute value below `k`, i.e.
/// `(−k, k)^n ∩ (2ℤ)^n`, in lexicographic order. Has exactly `k^n` elements.
pub fn even_box(k: usize, n: usize) -> Result<Vec<Vec<i64>>> {
    check_odd(k)?;
    let axis = even_offsets(k);
    Ok(product(&vec![axis; n]))
}

/// The parity slab `S(j, k)`: tuples in `[−k, k]^n` whose coordinate `axis`
/// is even and whose other coordinates are odd, in lexicographic order.
/// `axis` is zero-based. Has exactly `k·(k+1)^{n−1}` elements.
pub fn parity_slab(axis: usize, k: usize, n: usize) -> Result<Vec<Vec<i64>>> {
    check_odd(k)?;
    if axis >= n {
        return Err(Error::usage(format!("axis {axis} out of range for dimension {n}")));
    }
    let axes: Vec<Vec<i64>> =
        (0..n).map(|a| if a == axis { even_offsets(k) } else { odd_offsets(k) }).collect();
    Ok(product(&axes))
}

pub(crate) fn check_odd(k: usize) -> Result<()> {
    if k.is_multiple_of(2) {
        return Err(Error::usage(format!("window parameter k = {k} must be odd")));
    }
    Ok(())
}

/// Even integers in `[−k, k]` for odd `k`: `−(k−1), …, k−1`.
pub(crate) fn even_offsets(k: usize) -> Vec<i64> {
    let k = k as i64;
    (-(k - 1)..=k - 1).step_by(2).collect()
}

/// Odd integers in `[−k, k]` for odd `k`: `−k, …, k`.
pub(crate) fn odd_offsets(k: usize) -> Vec<i64> {
    let k = k as i64;
    (-k..=k).step_by(2).collect()
}

fn product(axes: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SamplingPlan {
    Exhaustive { cap: u64 },
    MonteCarlo { samples: u64, seed: u64 },
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan::exhaustive()
    }
}

impl SamplingPlan {
    pub fn exhaustive() -> Self {
        SamplingPlan::Exhaustive { cap: DEFAULT_EXHAUSTIVE_CAP }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        SamplingPlan::MonteCarlo { samples, seed }
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self, SamplingPlan::Exhaustive { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if let SamplingPlan::MonteCarlo { samples, .. } = self {
            if *samples < 2 {
                return Err(Error::usage("Monte Carlo plans need at least 2 samples for a standard error"));
            }
        }
        Ok(())
    }

    fn admit(&self, size: Option<u64>, what: &str) -> Result<()> {
        self.validate()?;
        if let SamplingPlan::Exhaustive { cap } = self {
            match size {
                Some(s) if s <= *cap => {}
                Some(s) => {
                    return Err(Error::Capacity(format!(
                        "exhaustive {what} needs {s} evaluations, cap is {cap}"
                    )))
                }
                None => return Err(Error::Capacity(format!("exhaustive {what} size overflows, cap is {cap}"))),
            }
        }
        Ok(())
    }
}

/// Mean of a sampled or enumerated quantity and its standard error
/// (zero for exhaustive evaluation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(mean: f64) -> Self {
        Estimate { mean, std_error: 0.0 }
    }

    fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = tree_sum(values) / n;
        let ss = tree_sum_by(0, values.len(), &|i| {
            let d = values[i] - mean;
            d * d
        });
        let var = ss / (n - 1.0);
        Estimate { mean, std_error: (var / n).sqrt() }
    }
}

fn sample_rng(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

fn sign_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn sign_count(n: usize) -> Option<u64> {
    if n >= 64 {
        None
    } else {
        Some(1u64 << n)
    }
}

fn check_sign_dim(n: usize) -> Result<()> {
    if n > 64 {
        return Err(Error::usage("sign vectors are limited to 64 coordinates"));
    }
    Ok(())
}

/// `E_ε evaluator(ε)` for uniform `ε ∈ {−1, 1}^n`. Exhaustive plans visit the
/// sign patterns in mask order `0..2^n`.
pub fn expect_signs<F>(n: usize, plan: &SamplingPlan, evaluator: F) -> Result<Estimate>
where
    F: Fn(SignVector) -> f64 + Sync,
{
    check_sign_dim(n)?;
    plan.admit(sign_count(n), "sign expectation")?;
    Ok(match *plan {
        SamplingPlan::Exhaustive { .. } => {
            let count = 1usize << n;
            let total = tree_sum_by(0, count, &|i| evaluator(SignVector::from_mask(n, i as u64)));
            Estimate::exact(total / count as f64)
        }
        SamplingPlan::MonteCarlo { samples, seed } => {
            let values: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|s| {
                    let mut rng = sample_rng(seed, s);
                    evaluator(SignVector::from_mask(n, rng.random::<u64>() & sign_mask(n)))
                })
                .collect();
            Estimate::from_samples(&values)
        }
    })
}

/// `∫ evaluator dμ` over the uniform probability measure on ℤ_m^n.
pub fn integrate_torus<F>(domain: &TorusDomain, plan: &SamplingPlan, evaluator: F) -> Result<Estimate>
where
    F: Fn(&TorusPoint) -> f64 + Sync,
{
    integrate_torus_index(domain, plan, |i| evaluator(&domain.point_at(i)))
}

/// As [`integrate_torus`], with points passed by row-major index.
pub fn integrate_torus_index<F>(domain: &TorusDomain, plan: &SamplingPlan, evaluator: F) -> Result<Estimate>
where
    F: Fn(usize) -> f64 + Sync,
{
    let count = domain.point_count()?;
    plan.admit(Some(count as u64), "torus integral")?;
    Ok(match *plan {
        SamplingPlan::Exhaustive { .. } => Estimate::exact(tree_sum_by(0, count, &evaluator) / count as f64),
        SamplingPlan::MonteCarlo { samples, seed } => {
            let values: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|s| evaluator(sample_rng(seed, s).random_range(0..count)))
                .collect();
            Estimate::from_samples(&values)
        }
    })
}

/// Joint estimate of `K` quantities `E_ε ∫ g(x, ε) dμ(x)`.
///
/// Under Monte Carlo each sample draws `(x, ε)` once and evaluates all `K`
/// outputs at that draw (common random numbers). Exhaustive plans enumerate
/// the full product `ℤ_m^n × {−1, 1}^n`.
pub fn estimate_joint<const K: usize, F>(
    domain: &TorusDomain,
    plan: &SamplingPlan,
    evaluator: F,
) -> Result<[Estimate; K]>
where
    F: Fn(usize, SignVector) -> [f64; K] + Sync,
{
    let n = domain.n();
    check_sign_dim(n)?;
    let count = domain.point_count()?;
    let size = sign_count(n).and_then(|s| s.checked_mul(count as u64));
    plan.admit(size, "joint expectation")?;
    Ok(match *plan {
        SamplingPlan::Exhaustive { .. } => {
            let signs = 1usize << n;
            let total = signs * count;
            let mut out = [Estimate::exact(0.0); K];
            for (q, slot) in out.iter_mut().enumerate() {
                let s = tree_sum_by(0, total, &|i| {
                    evaluator(i / signs, SignVector::from_mask(n, (i % signs) as u64))[q]
                });
                *slot = Estimate::exact(s / total as f64);
            }
            out
        }
        SamplingPlan::MonteCarlo { samples, seed } => {
            let draws: Vec<[f64; K]> = (0..samples)
                .into_par_iter()
                .map(|s| {
                    let mut rng = sample_rng(seed, s);
                    let x = rng.random_range(0..count);
                    let eps = SignVector::from_mask(n, rng.random::<u64>() & sign_mask(n));
                    evaluator(x, eps)
                })
                .collect();
            std::array::from_fn(|q| {
                let column: Vec<f64> = draws.iter().map(|d| d[q]).collect();
                Estimate::from_samples(&column)
            })
        }
    })
}

/// A function `ℤ_m^n → X` tabulated densely in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    domain: TorusDomain,
    space: LpSpace,
    values: Vec<f64>,
}

impl GridFunction {
    /// From flat row-major storage (`m^n · storage_len` reals).
    pub fn new(domain: TorusDomain, space: LpSpace, values: Vec<f64>) -> Result<Self> {
        let count = domain.point_count()?;
        let expected = count
            .checked_mul(space.storage_len())
            .ok_or_else(|| Error::Capacity("grid function storage overflows".into()))?;
        if values.len() != expected {
            return Err(Error::usage(format!(
                "grid function table has {} reals, expected {expected}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite grid value {bad}")));
        }
        Ok(GridFunction { domain, space, values })
    }

    pub fn from_vectors(domain: TorusDomain, space: LpSpace, vectors: &[Vector]) -> Result<Self> {
        let count = domain.point_count()?;
        if vectors.len() != count {
            return Err(Error::usage(format!("{} vectors for {count} torus points", vectors.len())));
        }
        let mut values = Vec::with_capacity(count * space.storage_len());
        for v in vectors {
            space.check(v)?;
            values.extend_from_slice(v.coords());
        }
        Self::new(domain, space, values)
    }

    pub fn from_fn<F>(domain: TorusDomain, space: LpSpace, mut f: F) -> Result<Self>
    where
        F: FnMut(&TorusPoint) -> Vector,
    {
        let count = domain.point_count()?;
        let vectors: Vec<Vector> = (0..count).map(|i| f(&domain.point_at(i))).collect();
        Self::from_vectors(domain, space, &vectors)
    }

    pub fn constant(domain: TorusDomain, space: LpSpace, v: &Vector) -> Result<Self> {
        space.check(v)?;
        let count = domain.point_count()?;
        Self::new(domain, space, v.coords().repeat(count))
    }

    /// Real scalar function on ℤ_m^n, valued in ℓ_1^1.
    pub fn scalar(domain: TorusDomain, values: Vec<f64>) -> Result<Self> {
        Self::new(domain, LpSpace::real(1, 1.0)?, values)
    }

    /// Independent standard Gaussian coordinates at every point.
    pub fn random_gaussian<R: Rng + ?Sized>(domain: TorusDomain, space: LpSpace, rng: &mut R) -> Result<Self> {
        let len = domain.point_count()? * space.storage_len();
        let values = (0..len).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        Self::new(domain, space, values)
    }

    pub(crate) fn from_parts_unchecked(domain: TorusDomain, space: LpSpace, values: Vec<f64>) -> Self {
        GridFunction { domain, space, values }
    }

    pub fn domain(&self) -> &TorusDomain {
        &self.domain
    }

    pub fn space(&self) -> &LpSpace {
        &self.space
    }

    pub fn stride(&self) -> usize {
        self.space.storage_len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point_count(&self) -> usize {
        self.values.len() / self.stride()
    }

    pub fn value(&self, index: usize) -> &[f64] {
        let s = self.stride();
        &self.values[index * s..(index + 1) * s]
    }

    pub fn value_at(&self, x: &TorusPoint) -> &[f64] {
        self.value(self.domain.index_of(x))
    }

    pub fn vectors(&self) -> Vec<Vector> {
        self.values.chunks_exact(self.stride()).map(|c| Vector::new(c.to_vec())).collect()
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        let values = self.values.iter().map(|v| c * v).collect();
        GridFunction::from_parts_unchecked(self.domain, self.space, values)
    }

    /// `x ↦ f(x) + v`.
    pub fn translated(&self, v: &Vector) -> Result<GridFunction> {
        self.space.check(v)?;
        let s = self.stride();
        let values = self.values.iter().enumerate().map(|(i, x)| x + v.coords()[i % s]).collect();
        Ok(GridFunction::from_parts_unchecked(self.domain, self.space, values))
    }

    /// `x ↦ f(x + offset)`.
    pub fn precomposed_shift(&self, offset: &[i64]) -> Result<GridFunction> {
        if offset.len() != self.domain.n() {
            return Err(Error::usage("shift offset length differs from torus dimension"));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.point_count() {
            values.extend_from_slice(self.value(self.domain.offset_index(i, offset)));
        }
        Ok(GridFunction::from_parts_unchecked(self.domain, self.space, values))
    }
}
