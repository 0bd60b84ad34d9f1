//! Reductions whose result does not depend on the rayon thread count.
//!
//! Every reduction splits the index range into chunks of a fixed size,
//! reduces each chunk sequentially, and then adds the chunk results in
//! index order.

use rayon::prelude::*;

/// Chunk length used by all deterministic reductions.
pub const CHUNK: usize = 1 << 13;

/// Deterministic sum of `f(i)` for `i` in `0..n`.
pub fn sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        })
        .collect();
    partial.iter().sum()
}

/// Deterministic maximum of `f(i)`; returns `f64::NEG_INFINITY` for `n == 0`.
pub fn max_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(&f).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    partial.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_by(a.len(), |i| a[i] * b[i])
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut()
        .with_min_len(CHUNK)
        .zip(x.par_iter())
        .for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.par_iter_mut().with_min_len(CHUNK).for_each(|v| *v *= alpha);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_across_pools() {
        let n = 100_003;
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let reference = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sum_by(n, f));
        for threads in [2, 4, 8] {
            let got = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sum_by(n, f));
            assert_eq!(got.to_bits(), reference.to_bits());
        }
    }

    #[test]
    fn empty_reductions() {
        assert_eq!(sum_by(0, |_| 1.0), 0.0);
        assert_eq!(max_by(0, |_| 1.0), f64::NEG_INFINITY);
    }
}
