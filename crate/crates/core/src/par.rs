//! Parallel map helpers.
//!
//! `indexed_map` fans the closure out over the rayon pool when the
//! `parallel` feature is on and degrades to a plain loop otherwise.
//! Results are collected in index order and any reduction over them is
//! performed sequentially by the caller, so the output never depends on
//! thread count.

/// Evaluate `f` on `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Evaluate `f` on `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// The sequential fallback, unconditionally. Benchmarks compare this
/// against [`indexed_map`] on the same workloads.
pub fn indexed_map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Cap the global worker pool at `threads` (all cores when `None`).
/// Call once, before any parallel work. Thread count never changes
/// results, only wall time.
#[cfg(feature = "parallel")]
pub fn init_thread_pool(threads: Option<usize>) -> crate::error::Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| crate::error::Error::Argument(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Without the `parallel` feature everything runs on the calling thread.
#[cfg(not(feature = "parallel"))]
pub fn init_thread_pool(_threads: Option<usize>) -> crate::error::Result<()> {
    Ok(())
}
