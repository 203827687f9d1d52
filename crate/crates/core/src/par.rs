//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature, [`ExecMode::Parallel`] maps over rayon's
//! global pool. Without it, both modes run sequentially. Output order always
//! matches input order.

/// Rows per chunk for batch reductions. Fixed so that partial sums, and thus
/// rounding, do not depend on the thread count or the execution mode.
pub const CHUNK_ROWS: usize = 64;

/// Batches smaller than this are not worth fanning out.
pub const PAR_MIN_ROWS: usize = 4 * CHUNK_ROWS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// Picks parallel execution only for batches large enough to benefit.
    pub fn for_rows(rows: usize) -> Self {
        if rows >= PAR_MIN_ROWS {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_indices<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Maps `f` over the row chunks `[start, end)` of a batch of `rows` rows.
pub fn map_chunks<R, F>(mode: ExecMode, rows: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize, usize) -> R + Sync + Send,
{
    let n_chunks = rows.div_ceil(CHUNK_ROWS);
    map_indices(mode, n_chunks, |c| {
        let start = c * CHUNK_ROWS;
        f(start, (start + CHUNK_ROWS).min(rows))
    })
}

/// Runs `f` inside a pool limited to `jobs` threads (0 = rayon default).
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if jobs > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}
