//! Batch dispatch: data-parallel map over independent items with a
//! sequential fallback.
//!
//! With the `parallel` feature (default) the parallel entry points run on
//! rayon's global pool. Results are collected in index order, so callers
//! that reduce them sequentially get bit-identical output regardless of
//! thread scheduling. Without the feature both entry points are sequential.

/// Maps `f` over `0..n`, in parallel when enabled and `parallel` is true.
pub fn map_indexed<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, in parallel when enabled and `parallel` is true.
pub fn map_slice<I, T, F>(items: &[I], parallel: bool, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indexed(items.len(), parallel, |i| f(&items[i]))
}
