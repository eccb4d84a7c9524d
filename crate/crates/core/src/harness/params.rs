//! Admissible `(m, k)` for the composite smoothing chain.

use crate::error::{Error, Result};
use crate::space::check_type_exponent;

/// Lower bound `4 n^{2 − 1/p}` on the window parameter.
pub fn k_lower(n: usize, p: f64) -> f64 {
    4.0 * (n as f64).powf(2.0 - 1.0 / p)
}

/// Upper bound `3m / (2 n^{1 − 1/p})` on the window parameter.
pub fn k_upper(n: usize, p: f64, m: usize) -> f64 {
    3.0 * m as f64 / (2.0 * (n as f64).powf(1.0 - 1.0 / p))
}

/// Lower bound `3 n^{3 − 2/p}` on the torus side.
pub fn m_lower(n: usize, p: f64) -> f64 {
    3.0 * (n as f64).powf(3.0 - 2.0 / p)
}

/// All four constraints, plus `4 | m` and `k` odd.
pub fn is_admissible(n: usize, p: f64, m: usize, k: usize) -> bool {
    let kf = k as f64;
    m.is_multiple_of(4)
        && k % 2 == 1
        && k_lower(n, p) <= kf
        && kf <= k_upper(n, p, m)
        && 2 * k < m
        && m as f64 >= m_lower(n, p)
}

/// Smallest `m` divisible by 4 (and then smallest odd `k`) satisfying
/// [`is_admissible`].
pub fn select_parameters(n: usize, p: f64) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::usage("n must be at least 1"));
    }
    check_type_exponent(p)?;
    let mut k = k_lower(n, p).ceil() as usize;
    if k.is_multiple_of(2) {
        k += 1;
    }
    let mut m = (m_lower(n, p).ceil() as usize).div_ceil(4).max(1) * 4;
    while !is_admissible(n, p, m, k) {
        m += 4;
        if m > 64 * (k + 1) * n.max(1) {
            return Err(Error::Internal(format!("no admissible (m, k) found for n = {n}, p = {p}")));
        }
    }
    Ok((m, k))
}
