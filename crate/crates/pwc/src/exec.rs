use pwc_core::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "PWC_THREADS";

/// Items handed to one rayon task at a time.
const MIN_CHUNK: usize = 64;

/// Rayon-backed [`Executor`] with its own pool.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    /// `threads = 0` lets rayon pick.
    pub fn new(threads: usize) -> anyhow::Result<Self> {
        Ok(Self {
            pool: ThreadPoolBuilder::new().num_threads(threads).build()?,
        })
    }

    /// Honours `PWC_THREADS` when it holds a positive integer.
    pub fn from_env() -> anyhow::Result<Self> {
        let threads = std::env::var(THREADS_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn for_each_mut<T, F>(&self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        self.pool.install(|| {
            items
                .par_iter_mut()
                .with_min_len(MIN_CHUNK)
                .enumerate()
                .for_each(|(i, x)| f(i, x))
        });
    }

    fn map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}
