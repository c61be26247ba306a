//! Execution mode for the data-parallel loops (enumeration, universe
//! construction, exhaustive property sweeps).
//!
//! Work is split into contiguous index ranges and results are merged in range
//! order, so output never depends on the mode or the thread count. Without the
//! `parallel` feature, [`Exec::Parallel`] runs sequentially.

use std::ops::Range;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

fn chunks(range: Range<u64>, chunk: u64) -> Vec<Range<u64>> {
    let chunk = chunk.max(1);
    let mut out = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = range.end.min(start.saturating_add(chunk));
        out.push(start..end);
        start = end;
    }
    out
}

/// Maps `f` over contiguous sub-ranges of `range` and concatenates the results
/// in range order.
pub fn map_ranges<T, F>(exec: Exec, range: Range<u64>, chunk: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> Vec<T> + Sync + Send,
{
    let parts = chunks(range, chunk);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return parts.into_par_iter().map(&f).flatten().collect();
    }
    let _ = exec;
    parts.into_iter().flat_map(f).collect()
}

/// Sums `f` over contiguous sub-ranges of `range`.
pub fn sum_ranges<F>(exec: Exec, range: Range<u64>, chunk: u64, f: F) -> u64
where
    F: Fn(Range<u64>) -> u64 + Sync + Send,
{
    let parts = chunks(range, chunk);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return parts.into_par_iter().map(&f).sum();
    }
    let _ = exec;
    parts.into_iter().map(f).sum()
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Flat-maps `f` over a slice, preserving order.
pub fn flat_map_slice<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Vec<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().flat_map_iter(f).collect();
    }
    let _ = exec;
    items.iter().flat_map(f).collect()
}

/// True iff `pred` holds for every element.
pub fn all_slice<T, F>(exec: Exec, items: &[T], pred: F) -> bool
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().all(pred);
    }
    let _ = exec;
    items.iter().all(pred)
}

pub fn sort_unstable<T: Ord + Send>(exec: Exec, v: &mut [T]) {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        v.par_sort_unstable();
        return;
    }
    let _ = exec;
    v.sort_unstable();
}
