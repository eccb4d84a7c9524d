//! Box-averaging operators on grid functions.
//!
//! Both kernels are products of one-dimensional stride-2 boxes, so each
//! operator runs as `n` axis passes. A pass keeps a running window sum per
//! parity class of the axis coordinate and slides it by two, which costs
//! O(m^n) per axis regardless of `k`. Offsets wrap around the torus.

use crate::error::{Error, Result};
use crate::functionals::{edge_energy, PairReport};
use crate::lattice::{self, check_odd, Estimate, GridFunction, SamplingPlan};

/// One axis of a separable kernel: taps at `first, first + 2, …`.
#[derive(Debug, Clone, Copy)]
struct AxisBox {
    first: i64,
    taps: usize,
}

impl AxisBox {
    fn even(k: usize) -> Self {
        AxisBox { first: -(k as i64 - 1), taps: k }
    }

    fn odd(k: usize) -> Self {
        AxisBox { first: -(k as i64), taps: k + 1 }
    }

    fn is_identity(&self) -> bool {
        self.first == 0 && self.taps == 1
    }
}

/// `A^(k) f(x) = k^{−n} Σ_{z ∈ (−k,k)^n ∩ (2ℤ)^n} f(x + z)`.
pub fn smooth(f: &GridFunction, k: usize) -> Result<GridFunction> {
    check_odd(k)?;
    let kernel = vec![AxisBox::even(k); f.domain().n()];
    Ok(separable(f, &kernel))
}

/// `E_axis^(k) f`: the average of `f(x + y)` over `y` in the parity slab
/// (`axis` coordinate even, others odd, all in `[−k, k]`). `axis` is
/// zero-based.
pub fn project(f: &GridFunction, axis: usize, k: usize) -> Result<GridFunction> {
    check_odd(k)?;
    let n = f.domain().n();
    if axis >= n {
        return Err(Error::usage(format!("axis {axis} out of range for dimension {n}")));
    }
    let kernel: Vec<AxisBox> =
        (0..n).map(|a| if a == axis { AxisBox::even(k) } else { AxisBox::odd(k) }).collect();
    Ok(separable(f, &kernel))
}

fn separable(f: &GridFunction, kernel: &[AxisBox]) -> GridFunction {
    let mut current = f.clone();
    for (axis, b) in kernel.iter().enumerate() {
        if b.is_identity() {
            continue;
        }
        current = axis_pass(&current, axis, *b);
    }
    current
}

fn axis_pass(f: &GridFunction, axis: usize, b: AxisBox) -> GridFunction {
    let d = f.domain();
    let m = d.m();
    let st = d.stride(axis);
    let vs = f.stride();
    let count = f.point_count();
    let input = f.values();
    let mut out = vec![0.0; input.len()];
    let taps = b.taps as f64;
    let wrap = |c: i64| c.rem_euclid(m as i64) as usize;
    let mut window = vec![0.0; vs];

    for block in 0..count / (m * st) {
        for inner in 0..st {
            let base = block * m * st + inner;
            let at = |c: usize, q: usize| input[(base + c * st) * vs + q];
            for start in 0..2.min(m) {
                window.iter_mut().for_each(|w| *w = 0.0);
                for i in 0..b.taps {
                    let c = wrap(start as i64 + b.first + 2 * i as i64);
                    for (q, w) in window.iter_mut().enumerate() {
                        *w += at(c, q);
                    }
                }
                let mut c = start;
                loop {
                    for (q, w) in window.iter().enumerate() {
                        out[(base + c * st) * vs + q] = w / taps;
                    }
                    if c + 2 >= m {
                        break;
                    }
                    let leaving = wrap(c as i64 + b.first);
                    let entering = wrap(c as i64 + b.first + 2 * b.taps as i64);
                    for (q, w) in window.iter_mut().enumerate() {
                        *w += at(entering, q) - at(leaving, q);
                    }
                    c += 2;
                }
            }
        }
    }
    GridFunction::from_parts_unchecked(*d, *f.space(), out)
}

/// `Σ_j ∫ ‖f(x + e_j) − f(x − e_j)‖^p dμ` restricted to one axis.
pub fn central_difference_energy(f: &GridFunction, axis: usize, p: f64, plan: &SamplingPlan) -> Result<Estimate> {
    let d = f.domain();
    if axis >= d.n() {
        return Err(Error::usage(format!("axis {axis} out of range for dimension {}", d.n())));
    }
    lattice::integrate_torus_index(d, plan, |x| {
        f.space().norm_diff_pow(f.value(d.step_index(x, axis, 1)), f.value(d.step_index(x, axis, -1)), p)
    })
}

/// Both sides of the smoothing bound
/// `∫ ‖A^(k) f − f‖^p ≤ (k−1)^p n^{p−1} Σ_j ∫ ‖f(x + e_j) − f(x)‖^p`.
///
/// The report's `scale` is `(k−1)^p n^{p−1}`, so `bound_margin()` is the
/// slack of the inequality.
pub fn smoothing_bound_report(f: &GridFunction, k: usize, p: f64, plan: &SamplingPlan) -> Result<PairReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::usage(format!("smoothing bound needs finite p ≥ 1, got {p}")));
    }
    let smoothed = smooth(f, k)?;
    let space = f.space();
    let lhs = lattice::integrate_torus_index(f.domain(), plan, |x| {
        space.norm_diff_pow(smoothed.value(x), f.value(x), p)
    })?;
    let rhs = edge_energy(f, p, plan)?;
    let n = f.domain().n() as f64;
    let scale = (k as f64 - 1.0).powf(p) * n.powf(p - 1.0);
    Ok(PairReport::new(lhs, rhs, p, scale))
}

#[cfg(test)]
pub(crate) mod naive {
    //! Direct-summation oracles, independent of the sliding-window passes.
    use crate::lattice::{even_box, parity_slab, GridFunction};

    fn average_over(f: &GridFunction, offsets: &[Vec<i64>]) -> GridFunction {
        let d = *f.domain();
        let vs = f.stride();
        let mut out = vec![0.0; f.values().len()];
        for x in 0..f.point_count() {
            for off in offsets {
                let y = d.offset_index(x, off);
                for q in 0..vs {
                    out[x * vs + q] += f.value(y)[q];
                }
            }
            for q in 0..vs {
                out[x * vs + q] /= offsets.len() as f64;
            }
        }
        GridFunction::new(d, *f.space(), out).unwrap()
    }

    pub fn smooth(f: &GridFunction, k: usize) -> GridFunction {
        average_over(f, &even_box(k, f.domain().n()).unwrap())
    }

    pub fn project(f: &GridFunction, axis: usize, k: usize) -> GridFunction {
        average_over(f, &parity_slab(axis, k, f.domain().n()).unwrap())
    }
}
