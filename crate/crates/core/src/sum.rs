//! Pairwise (tree) summation.
//!
//! All Frobenius-style reductions in this crate go through these helpers so
//! that rounding error stays O(log n) instead of O(n) on ~23k-row inputs.

/// Sum `f(i)` for `i` in `lo..hi` with pairwise recursion.
pub fn pairwise_by<F>(lo: usize, hi: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Copy,
{
    const BASE: usize = 64;
    let len = hi - lo;
    if len <= BASE {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_by(lo, mid, f) + pairwise_by(mid, hi, f)
    }
}

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_by(0, xs.len(), |i| xs[i])
}

/// Pairwise sum of squares of a slice.
pub fn pairwise_sum_sq(xs: &[f64]) -> f64 {
    pairwise_by(0, xs.len(), |i| xs[i] * xs[i])
}

/// Pairwise sum of elementwise products. Panics if lengths differ.
pub fn pairwise_dot(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    pairwise_by(0, xs.len(), |i| xs[i] * ys[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_exact_sum_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
        assert_eq!(pairwise_by(0, 0, |_| 1.0), 0.0);
    }

    #[test]
    fn more_accurate_than_left_fold() {
        // 1 + n*eps summed naively loses the small terms; pairwise keeps them.
        let mut xs = vec![1.0f64];
        xs.extend(std::iter::repeat(1e-16).take(1 << 20));
        let naive: f64 = xs.iter().sum();
        let pair = pairwise_sum(&xs);
        let exact = 1.0 + (1 << 20) as f64 * 1e-16;
        assert!((pair - exact).abs() < (naive - exact).abs());
        assert!((pair - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn dot_and_sumsq() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [4.0, 5.0, 6.0];
        assert_eq!(pairwise_dot(&xs, &ys), 32.0);
        assert_eq!(pairwise_sum_sq(&xs), 14.0);
    }
}
