//! Deterministic reductions.
//!
//! Every global sum in the crate goes through [`pairwise_sum`] applied to a
//! vector of per-row partials whose layout does not depend on the number of
//! worker threads, so results are bit-identical for any pool size.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::scalar::Real;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BIMERON_THREADS";

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

/// Runs `f` inside the crate-wide pool sized by `BIMERON_THREADS`.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}

/// Number of workers in the crate-wide pool.
pub fn worker_count() -> usize {
    pool().current_num_threads()
}

/// Fixed-tree pairwise summation.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        let mut acc = T::zero();
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluates `row(j)` for every row in parallel and sums the partials in a
/// fixed order.
pub fn sum_rows<T: Real, F>(rows: usize, row: F) -> T
where
    F: Fn(usize) -> T + Sync + Send,
{
    let partials: Vec<T> = install(|| (0..rows).into_par_iter().map(&row).collect());
    pairwise_sum(&partials)
}

/// Like [`sum_rows`] for a fixed number of simultaneous accumulators.
pub fn sum_rows_n<T: Real, const K: usize, F>(rows: usize, row: F) -> [T; K]
where
    F: Fn(usize) -> [T; K] + Sync + Send,
{
    let partials: Vec<[T; K]> = install(|| (0..rows).into_par_iter().map(&row).collect());
    let mut out = [T::zero(); K];
    let mut column = Vec::with_capacity(partials.len());
    for (k, slot) in out.iter_mut().enumerate() {
        column.clear();
        column.extend(partials.iter().map(|p| p[k]));
        *slot = pairwise_sum(&column);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn row_sums_are_order_independent() {
        let a: f64 = sum_rows(257, |j| (j as f64).sin() * 1e-3 + 1.0 / (j as f64 + 1.0));
        let b: f64 = sum_rows(257, |j| (j as f64).sin() * 1e-3 + 1.0 / (j as f64 + 1.0));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
