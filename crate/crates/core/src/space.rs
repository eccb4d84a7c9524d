//! Finite-dimensional ℓ_p spaces over the reals or their complexification.
//!
//! Vectors of a complexified space store `dim` interleaved `(re, im)` pairs.
//! The norm takes the complex modulus of each pair before the ℓ_p
//! aggregation, so multiplication by `e^{iθ}` is an isometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::tree_sum_by;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMode {
    Real,
    Complexified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpSpace {
    dim: usize,
    #[serde(with = "exponent_serde")]
    exponent: f64,
    scalar_mode: ScalarMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Vector { coords }
    }

    /// Complex vector from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Vector { coords: pairs.iter().flat_map(|&(re, im)| [re, im]).collect() }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Vector {
        Vector { coords: self.coords.iter().map(|x| c * x).collect() }
    }
}

impl From<Vec<f64>> for Vector {
    fn from(coords: Vec<f64>) -> Self {
        Vector::new(coords)
    }
}

impl LpSpace {
    /// `exponent` may be `f64::INFINITY` for the max norm.
    pub fn new(dim: usize, exponent: f64, scalar_mode: ScalarMode) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("space dimension must be at least 1"));
        }
        if exponent.is_nan() || exponent < 1.0 {
            return Err(Error::usage(format!("norm exponent must be in [1, inf], got {exponent}")));
        }
        Ok(LpSpace { dim, exponent, scalar_mode })
    }

    pub fn real(dim: usize, exponent: f64) -> Result<Self> {
        Self::new(dim, exponent, ScalarMode::Real)
    }

    pub fn complexified(dim: usize, exponent: f64) -> Result<Self> {
        Self::new(dim, exponent, ScalarMode::Complexified)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn scalar_mode(&self) -> ScalarMode {
        self.scalar_mode
    }

    pub fn is_complex(&self) -> bool {
        self.scalar_mode == ScalarMode::Complexified
    }

    /// Number of reals stored per vector.
    pub fn storage_len(&self) -> usize {
        match self.scalar_mode {
            ScalarMode::Real => self.dim,
            ScalarMode::Complexified => 2 * self.dim,
        }
    }

    /// The same ℓ_p norm over complex scalars.
    pub fn complexify(&self) -> LpSpace {
        LpSpace { scalar_mode: ScalarMode::Complexified, ..*self }
    }

    pub fn zero(&self) -> Vector {
        Vector::new(vec![0.0; self.storage_len()])
    }

    /// The `t`-th standard basis vector (real part 1 in complexified mode).
    pub fn basis(&self, t: usize) -> Result<Vector> {
        if t >= self.dim {
            return Err(Error::usage(format!("basis index {t} out of range for dimension {}", self.dim)));
        }
        let mut v = self.zero();
        let slot = if self.is_complex() { 2 * t } else { t };
        v.coords[slot] = 1.0;
        Ok(v)
    }

    /// Embeds a vector of the real space into the complexified space with
    /// zero imaginary parts. Complex vectors pass through unchanged.
    pub fn lift(&self, v: &Vector) -> Result<Vector> {
        self.check(v)?;
        Ok(match self.scalar_mode {
            ScalarMode::Complexified => v.clone(),
            ScalarMode::Real => Vector::new(v.coords.iter().flat_map(|&x| [x, 0.0]).collect()),
        })
    }

    pub fn check(&self, v: &Vector) -> Result<()> {
        self.check_slice(&v.coords)
    }

    pub fn check_slice(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.storage_len() {
            return Err(Error::usage(format!(
                "vector has {} stored coordinates, space expects {}",
                coords.len(),
                self.storage_len()
            )));
        }
        if let Some(bad) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {bad}")));
        }
        Ok(())
    }

    pub fn norm(&self, v: &Vector) -> Result<f64> {
        self.check(v)?;
        Ok(self.norm_slice(&v.coords))
    }

    /// Norm of raw storage. The caller guarantees the length is `storage_len`.
    pub fn norm_slice(&self, v: &[f64]) -> f64 {
        self.aggregate(&|t| self.component(v, t), &|t| self.component_sq(v, t))
    }

    /// `‖a − b‖` without materializing the difference.
    pub fn norm_diff(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        self.aggregate(&|t| self.component_diff(a, b, t), &|t| self.component_diff_sq(a, b, t))
    }

    /// `‖v‖^p`. When `p` equals the norm exponent the root is skipped.
    pub fn norm_pow_slice(&self, v: &[f64], p: f64) -> f64 {
        if p == self.exponent && p.is_finite() {
            self.power_sum(&|t| self.component(v, t), &|t| self.component_sq(v, t))
        } else {
            self.norm_slice(v).powf(p)
        }
    }

    /// `‖a − b‖^p`.
    pub fn norm_diff_pow(&self, a: &[f64], b: &[f64], p: f64) -> f64 {
        if p == self.exponent && p.is_finite() {
            self.power_sum(&|t| self.component_diff(a, b, t), &|t| self.component_diff_sq(a, b, t))
        } else {
            self.norm_diff(a, b).powf(p)
        }
    }

    /// Coordinatewise linear combination `Σ coeffs[i] · vectors[i]`.
    pub fn combine(&self, coeffs: &[f64], vectors: &[Vector]) -> Result<Vector> {
        if coeffs.len() != vectors.len() {
            return Err(Error::usage(format!(
                "{} coefficients for {} vectors",
                coeffs.len(),
                vectors.len()
            )));
        }
        for v in vectors {
            self.check(v)?;
        }
        let mut out = self.zero();
        for (c, v) in coeffs.iter().zip(vectors) {
            axpy(*c, &v.coords, &mut out.coords);
        }
        Ok(out)
    }

    /// Multiplies every complex coordinate by `e^{iθ}`.
    pub fn unit_rotate(&self, v: &Vector, theta: f64) -> Result<Vector> {
        if !self.is_complex() {
            return Err(Error::usage("unit_rotate requires a complexified space"));
        }
        self.check(v)?;
        let (s, c) = theta.sin_cos();
        Ok(Vector::new(rotate_pairs(&v.coords, c, s)))
    }

    fn component(&self, v: &[f64], t: usize) -> f64 {
        match self.scalar_mode {
            ScalarMode::Real => v[t].abs(),
            ScalarMode::Complexified => v[2 * t].hypot(v[2 * t + 1]),
        }
    }

    fn component_sq(&self, v: &[f64], t: usize) -> f64 {
        match self.scalar_mode {
            ScalarMode::Real => v[t] * v[t],
            ScalarMode::Complexified => v[2 * t] * v[2 * t] + v[2 * t + 1] * v[2 * t + 1],
        }
    }

    fn component_diff(&self, a: &[f64], b: &[f64], t: usize) -> f64 {
        match self.scalar_mode {
            ScalarMode::Real => (a[t] - b[t]).abs(),
            ScalarMode::Complexified => (a[2 * t] - b[2 * t]).hypot(a[2 * t + 1] - b[2 * t + 1]),
        }
    }

    fn component_diff_sq(&self, a: &[f64], b: &[f64], t: usize) -> f64 {
        match self.scalar_mode {
            ScalarMode::Real => {
                let d = a[t] - b[t];
                d * d
            }
            ScalarMode::Complexified => {
                let re = a[2 * t] - b[2 * t];
                let im = a[2 * t + 1] - b[2 * t + 1];
                re * re + im * im
            }
        }
    }

    /// `Σ_t |z_t|^exponent` for finite exponents.
    fn power_sum<M, S>(&self, modulus: &M, modulus_sq: &S) -> f64
    where
        M: Fn(usize) -> f64 + Sync,
        S: Fn(usize) -> f64 + Sync,
    {
        let q = self.exponent;
        if q == 1.0 {
            tree_sum_by(0, self.dim, modulus)
        } else if q == 2.0 {
            tree_sum_by(0, self.dim, modulus_sq)
        } else {
            tree_sum_by(0, self.dim, &|t| modulus(t).powf(q))
        }
    }

    fn aggregate<M, S>(&self, modulus: &M, modulus_sq: &S) -> f64
    where
        M: Fn(usize) -> f64 + Sync,
        S: Fn(usize) -> f64 + Sync,
    {
        let q = self.exponent;
        if q.is_infinite() {
            (0..self.dim).map(modulus).fold(0.0, f64::max)
        } else if q == 1.0 {
            self.power_sum(modulus, modulus_sq)
        } else if q == 2.0 {
            self.power_sum(modulus, modulus_sq).sqrt()
        } else {
            self.power_sum(modulus, modulus_sq).powf(q.recip())
        }
    }
}

pub(crate) fn axpy(c: f64, x: &[f64], out: &mut [f64]) {
    for (o, xi) in out.iter_mut().zip(x) {
        *o += c * xi;
    }
}

/// Multiplies interleaved complex pairs by `cos + i·sin`.
pub(crate) fn rotate_pairs(v: &[f64], cos: f64, sin: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    for pair in v.chunks_exact(2) {
        let (re, im) = (pair[0], pair[1]);
        out.push(re * cos - im * sin);
        out.push(re * sin + im * cos);
    }
    out
}

/// Rejects exponents outside the type range `[1, 2]`.
pub fn check_type_exponent(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::usage(format!("type exponent p must lie in [1, 2], got {p}")));
    }
    Ok(())
}

mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(p) => Ok(p),
            Repr::Text(t) => super::parse_exponent(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a norm exponent; accepts `inf` / `infinity`.
pub fn parse_exponent(text: &str) -> std::result::Result<f64, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|e| format!("bad norm exponent {text:?}: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn real(dim: usize, p: f64) -> LpSpace {
        LpSpace::real(dim, p).unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_eq!(real(2, 2.0).norm(&vec![3.0, 4.0].into()).unwrap(), 5.0);
        assert_eq!(real(2, 1.0).norm(&vec![1.0, -1.0].into()).unwrap(), 2.0);
        assert_eq!(real(3, f64::INFINITY).norm(&vec![1.0, -3.0, 2.0].into()).unwrap(), 3.0);
    }

    #[test]
    fn complex_norm_uses_modulus() {
        let s = LpSpace::complexified(2, 1.0).unwrap();
        let v = Vector::from_pairs(&[(3.0, 4.0), (0.0, -1.0)]);
        assert_eq!(s.norm(&v).unwrap(), 6.0);
    }

    #[test]
    fn norm_errors() {
        let s = real(2, 2.0);
        assert!(matches!(s.norm(&vec![1.0].into()), Err(Error::Usage(_))));
        assert!(matches!(s.norm(&vec![1.0, f64::NAN].into()), Err(Error::InvalidInput(_))));
        assert!(matches!(s.norm(&vec![f64::INFINITY, 0.0].into()), Err(Error::InvalidInput(_))));
        assert!(LpSpace::real(0, 2.0).is_err());
        assert!(LpSpace::real(2, 0.5).is_err());
    }

    #[test]
    fn combine_examples() {
        let s = real(2, 2.0);
        let e = [Vector::new(vec![1.0, 0.0]), Vector::new(vec![0.0, 1.0])];
        assert_eq!(s.combine(&[1.0, 1.0], &e).unwrap().coords(), &[1.0, 1.0]);
        let same = [Vector::new(vec![0.3, -7.0]), Vector::new(vec![0.3, -7.0])];
        assert_eq!(s.combine(&[1.0, -1.0], &same).unwrap().coords(), &[0.0, 0.0]);
        let v = [Vector::new(vec![0.5, 0.25])];
        assert_eq!(s.combine(&[2.0], &v).unwrap().coords(), &[1.0, 0.5]);
        assert!(matches!(s.combine(&[1.0], &e), Err(Error::Usage(_))));
        assert!(matches!(s.combine(&[1.0], &[Vector::new(vec![1.0])]), Err(Error::Usage(_))));
    }

    #[test]
    fn rotate_examples() {
        let s = LpSpace::complexified(2, 2.0).unwrap();
        let v = Vector::from_pairs(&[(0.7, -1.2), (2.0, 0.1)]);
        let half = s.unit_rotate(&v, PI).unwrap();
        for (a, b) in half.coords().iter().zip(v.coords()) {
            assert!((a + b).abs() < 1e-12);
        }
        let q = s.unit_rotate(&Vector::from_pairs(&[(1.0, 0.0), (0.0, 0.0)]), PI / 2.0).unwrap();
        assert!((q.coords()[0]).abs() < 1e-15 && (q.coords()[1] - 1.0).abs() < 1e-15);
        let full = s.unit_rotate(&v, 2.0 * PI).unwrap();
        for (a, b) in full.coords().iter().zip(v.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(real(2, 2.0).unit_rotate(&vec![1.0, 0.0].into(), 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn lift_and_basis() {
        let s = real(2, 1.0);
        let v = s.lift(&vec![1.5, -2.0].into()).unwrap();
        assert_eq!(v.coords(), &[1.5, 0.0, -2.0, 0.0]);
        assert_eq!(s.complexify().norm(&v).unwrap(), 3.5);
        assert_eq!(s.complexify().basis(1).unwrap().coords(), &[0.0, 0.0, 1.0, 0.0]);
        assert!(s.basis(2).is_err());
    }

    #[test]
    fn exponent_round_trips_through_json() {
        let s = real(3, f64::INFINITY);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"inf\""));
        let back: LpSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    fn space_strategy() -> impl Strategy<Value = LpSpace> {
        (1usize..6, prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(f64::INFINITY)], any::<bool>())
            .prop_map(|(d, p, c)| {
                let mode = if c { ScalarMode::Complexified } else { ScalarMode::Real };
                LpSpace::new(d, p, mode).unwrap()
            })
    }

    fn pair_strategy() -> impl Strategy<Value = (LpSpace, Vec<f64>, Vec<f64>)> {
        space_strategy().prop_flat_map(|s| {
            let len = s.storage_len();
            (Just(s), prop::collection::vec(-10.0..10.0f64, len), prop::collection::vec(-10.0..10.0f64, len))
        })
    }

    proptest! {
        #[test]
        fn triangle_inequality((s, u, v) in pair_strategy()) {
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            prop_assert!(s.norm_slice(&w) <= s.norm_slice(&u) + s.norm_slice(&v) + 1e-12);
        }

        #[test]
        fn homogeneity((s, u, _v) in pair_strategy(), c in -5.0..5.0f64) {
            let cu: Vec<f64> = u.iter().map(|x| c * x).collect();
            let lhs = s.norm_slice(&cu);
            let rhs = c.abs() * s.norm_slice(&u);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300) + 1e-300);
        }

        #[test]
        fn parallelogram_for_hilbert(d in 1usize..6, complex in any::<bool>(),
                                     a in prop::collection::vec(-10.0..10.0f64, 12),
                                     b in prop::collection::vec(-10.0..10.0f64, 12)) {
            let mode = if complex { ScalarMode::Complexified } else { ScalarMode::Real };
            let s = LpSpace::new(d, 2.0, mode).unwrap();
            let (u, v) = (&a[..s.storage_len()], &b[..s.storage_len()]);
            let sum: Vec<f64> = u.iter().zip(v).map(|(x, y)| x + y).collect();
            let dif: Vec<f64> = u.iter().zip(v).map(|(x, y)| x - y).collect();
            let lhs = s.norm_slice(&sum).powi(2) + s.norm_slice(&dif).powi(2);
            let rhs = 2.0 * s.norm_slice(u).powi(2) + 2.0 * s.norm_slice(v).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
        }

        #[test]
        fn rotation_preserves_norm(d in 1usize..6, q in prop_oneof![Just(1.0), Just(2.0), Just(3.5), Just(f64::INFINITY)],
                                   coords in prop::collection::vec(-10.0..10.0f64, 12), theta in -10.0..10.0f64) {
            let s = LpSpace::complexified(d, q).unwrap();
            let v = Vector::new(coords[..s.storage_len()].to_vec());
            let before = s.norm(&v).unwrap();
            let after = s.norm(&s.unit_rotate(&v, theta).unwrap()).unwrap();
            prop_assert!((before - after).abs() <= 1e-12 * before.max(1e-300) + 1e-300);
        }

        #[test]
        fn norm_diff_matches_explicit_difference((s, u, v) in pair_strategy()) {
            let d: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
            prop_assert_eq!(s.norm_diff(&u, &v), s.norm_slice(&d));
        }
    }
}
