//! Pairwise (tree) summation.
//!
//! The reduction tree depends only on the length of the range, so results are
//! bit-identical whether the two halves are evaluated sequentially or on
//! different rayon workers.

const LEAF: usize = 16;
const PAR_THRESHOLD: usize = 1 << 12;

/// Sums `term(i)` for `i` in `lo..hi` along a fixed binary tree.
pub fn tree_sum_by<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi.saturating_sub(lo);
    if len <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        return acc;
    }
    let mid = lo + len / 2;
    if len >= PAR_THRESHOLD {
        let (a, b) = rayon::join(|| tree_sum_by(lo, mid, term), || tree_sum_by(mid, hi, term));
        a + b
    } else {
        tree_sum_by(lo, mid, term) + tree_sum_by(mid, hi, term)
    }
}

/// Pairwise sum of a slice.
pub fn tree_sum(values: &[f64]) -> f64 {
    tree_sum_by(0, values.len(), &|i| values[i])
}
