//! Data-parallel helpers with a sequential fallback when the `parallel`
//! feature is disabled.

/// How a batch of independent trials is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool (or the installed pool). Falls back to sequential
    /// without the `parallel` feature.
    #[default]
    Parallel,
}

/// Maps `f` over `range`, preserving index order in the output.
pub fn map_range<T, F>(exec: Execution, range: std::ops::Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            range.into_par_iter().map(f).collect()
        }
        _ => range.map(f).collect(),
    }
}

/// Runs `op` inside a pool of `threads` workers (sequentially for 1 thread
/// or without the `parallel` feature).
pub fn with_threads<R: Send>(threads: Option<usize>, op: impl FnOnce(Execution) -> R + Send) -> R {
    match threads {
        Some(1) => op(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| op(Execution::Parallel)),
            Err(_) => op(Execution::Parallel),
        },
        _ => op(Execution::Parallel),
    }
}
