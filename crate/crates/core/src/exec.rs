//! Data-parallel execution helpers.
//!
//! Work is always split into fixed-size chunks whose boundaries depend only on
//! the problem size, never on the thread count. Each chunk is reduced
//! sequentially and chunk results are returned in chunk order, so callers that
//! fold them left to right get the same floating point result whether the
//! chunks ran on rayon or in a plain loop.

use std::ops::Range;

use serde::{Deserialize, Serialize};

/// How chunked batch work is scheduled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise identical
    /// to [`Execution::Sequential`].
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually runs on a thread pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Chunk ranges covering `0..len`.
pub fn chunk_ranges(len: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..len)
        .step_by(chunk)
        .map(|start| start..(start + chunk).min(len))
        .collect()
}

/// Maps `f` over the chunks of `0..len`, returning results in chunk order.
pub fn map_chunks<T, F>(len: usize, chunk: usize, mode: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let ranges = chunk_ranges(len, chunk);
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return ranges.into_par_iter().map(f).collect();
    }
    let _ = mode;
    ranges.into_iter().map(f).collect()
}

/// Maps `f` over `items`, preserving order.
pub fn map_items<I, T, F>(items: &[I], mode: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}
