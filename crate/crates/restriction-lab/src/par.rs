//! Thin switch between rayon and plain loops.
//!
//! Compute kernels produce one value per output index through `map_indexed`,
//! which runs on the rayon pool when the `parallel` feature is enabled and
//! falls back to a sequential loop otherwise. Results are collected in index
//! order and all reductions downstream are sequential compensated folds, so
//! output is bit-identical for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential twin of `map_indexed`, kept available in every build so the
/// bench suite can compare the two paths directly.
pub fn map_indexed_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
