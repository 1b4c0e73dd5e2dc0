//! Summation and data-parallel helpers shared by the numerical modules.

use alloc::vec::Vec;

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (tree) summation. The association order depends only on the
/// slice length, so the result is reproducible regardless of how the terms
/// were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise summation of fixed-width lanes.
pub fn pairwise_sum_lanes<const N: usize>(xs: &[[f64; N]]) -> [f64; N] {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut acc = [0.0; N];
        for x in xs {
            for (a, v) in acc.iter_mut().zip(x) {
                *a += v;
            }
        }
        return acc;
    }
    let mid = xs.len() / 2;
    let lo = pairwise_sum_lanes(&xs[..mid]);
    let hi = pairwise_sum_lanes(&xs[mid..]);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = lo[i] + hi[i];
    }
    out
}

/// Evaluates `f(0..n)` and collects in index order. Runs on the current
/// rayon pool when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Sample mean and sample variance (divisor n - 1) with pairwise sums.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, pairwise_sum(&sq) / (n - 1) as f64)
}
