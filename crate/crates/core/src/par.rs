//! Node-parallel kernels.
//!
//! Work is split into fixed-size chunks whether or not the `parallel` feature
//! is enabled, and chunk partial sums are combined sequentially in chunk
//! order. Reductions are therefore bit-identical across thread counts and
//! between the rayon path and the sequential fallback.

use std::ops::Add;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// `out[i] = f(i)` for every index.
#[cfg(feature = "parallel")]
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = c * CHUNK;
        for (i, o) in chunk.iter_mut().enumerate() {
            *o = f(base + i);
        }
    });
}

#[cfg(not(feature = "parallel"))]
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// `out[i] = f(i, out[i])` for every index.
#[cfg(feature = "parallel")]
pub fn update<T, F>(out: &mut [T], f: F)
where
    T: Send + Copy,
    F: Fn(usize, T) -> T + Sync,
{
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = c * CHUNK;
        for (i, o) in chunk.iter_mut().enumerate() {
            *o = f(base + i, *o);
        }
    });
}

#[cfg(not(feature = "parallel"))]
pub fn update<T, F>(out: &mut [T], f: F)
where
    T: Send + Copy,
    F: Fn(usize, T) -> T + Sync,
{
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i, *o);
    }
}

fn chunk_sum<T, F>(c: usize, n: usize, zero: T, f: &F) -> T
where
    T: Add<Output = T> + Copy,
    F: Fn(usize) -> T,
{
    let lo = c * CHUNK;
    let hi = (lo + CHUNK).min(n);
    let mut acc = zero;
    for i in lo..hi {
        acc = acc + f(i);
    }
    acc
}

/// Deterministic `sum_{i<n} f(i)`.
#[cfg(feature = "parallel")]
pub fn sum<T, F>(n: usize, zero: T, f: F) -> T
where
    T: Add<Output = T> + Copy + Send + Sync,
    F: Fn(usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<T> = (0..chunks).into_par_iter().map(|c| chunk_sum(c, n, zero, &f)).collect();
    partial.into_iter().fold(zero, |a, b| a + b)
}

#[cfg(not(feature = "parallel"))]
pub fn sum<T, F>(n: usize, zero: T, f: F) -> T
where
    T: Add<Output = T> + Copy + Send + Sync,
    F: Fn(usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks).map(|c| chunk_sum(c, n, zero, &f)).fold(zero, |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_chunked_reference() {
        let n = 3 * CHUNK + 17;
        let s = sum(n, 0.0f64, |i| (i as f64).sqrt());
        let mut reference = 0.0;
        for c in 0..n.div_ceil(CHUNK) {
            let mut part = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                part += (i as f64).sqrt();
            }
            reference += part;
        }
        assert_eq!(s.to_bits(), reference.to_bits());
    }

    #[test]
    fn fill_and_update() {
        let mut v = vec![0usize; CHUNK + 5];
        fill(&mut v, |i| i);
        update(&mut v, |i, x| x + i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(sum(0, 0.0f64, |_| 1.0), 0.0);
    }
}

/// Fixed-width accumulator for fused multi-quantity reductions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Acc<const N: usize>(pub [f64; N]);

impl<const N: usize> Acc<N> {
    pub const ZERO: Self = Acc([0.0; N]);
}

impl<const N: usize> Add for Acc<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}
