use hybrid_pdem_core::Executor;
use rayon::prelude::*;

/// Executor backed by a dedicated rayon pool. Results come back in index
/// order, so reductions do not depend on the worker count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(workers: usize) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

/// Worker count from the command line, then `HYBRID_PDEM_WORKERS`, then the
/// number of available cores.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("HYBRID_PDEM_WORKERS").ok().and_then(|v| v.parse().ok()))
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1)
}
