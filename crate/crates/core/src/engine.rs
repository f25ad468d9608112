//! Execution strategy for per-beam work.
//!
//! With the `rayon` feature, beams fan out over a thread pool; without it, or with
//! one thread, they run in a plain loop. Results are always returned in index
//! order, so the choice never changes the output.

#[cfg(feature = "rayon")]
use std::sync::Arc;

#[cfg(feature = "rayon")]
use rayon::prelude::*;

/// Environment variable consulted when no explicit thread count is given.
pub const THREADS_ENV: &str = "ALDUS_THREADS";

#[derive(Clone, Default)]
pub struct Engine {
    #[cfg(feature = "rayon")]
    pool: Option<Arc<rayon::ThreadPool>>,
    sequential: bool,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("threads", &self.threads())
            .finish()
    }
}

impl Engine {
    pub fn sequential() -> Self {
        Self {
            sequential: true,
            ..Self::default()
        }
    }

    /// `0` uses all available cores, `1` runs sequentially.
    ///
    /// Without the `rayon` feature every count runs sequentially.
    pub fn with_threads(threads: usize) -> Self {
        match threads {
            1 => Self::sequential(),
            #[cfg(feature = "rayon")]
            0 => Self::default(),
            #[cfg(feature = "rayon")]
            n => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .thread_name(|i| format!("aldus-{i}"))
                    .build()
                    .expect("failed to build thread pool");
                Self {
                    pool: Some(Arc::new(pool)),
                    sequential: false,
                }
            }
            #[cfg(not(feature = "rayon"))]
            _ => Self::sequential(),
        }
    }

    /// Threads from `ALDUS_THREADS`, falling back to automatic.
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        Self::with_threads(threads)
    }

    pub fn threads(&self) -> usize {
        if self.sequential {
            return 1;
        }
        #[cfg(feature = "rayon")]
        {
            self.pool
                .as_ref()
                .map_or_else(rayon::current_num_threads, |p| p.current_num_threads())
        }
        #[cfg(not(feature = "rayon"))]
        {
            1
        }
    }

    /// `(0..n).map(f)` collected in index order.
    pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.sequential {
            return (0..n).map(f).collect();
        }
        #[cfg(feature = "rayon")]
        {
            let run = || (0..n).into_par_iter().map(&f).collect();
            match &self.pool {
                Some(pool) => pool.install(run),
                None => run(),
            }
        }
        #[cfg(not(feature = "rayon"))]
        {
            (0..n).map(f).collect()
        }
    }
}
