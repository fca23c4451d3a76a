use qgraph_core::Executor;
use rayon::prelude::*;

/// Thread-pool executor. Results keep index order for any pool size.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `jobs = None` uses one worker per available core.
    pub fn new(jobs: Option<usize>) -> Self {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = jobs {
            b = b.num_threads(n.max(1));
        }
        Pool { pool: b.build().expect("thread pool") }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
