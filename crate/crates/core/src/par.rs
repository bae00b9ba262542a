//! Bounded worker pool used by grading and the attack harness. With the
//! `parallel` feature off every map runs sequentially on the caller's thread.

pub(crate) struct Pool {
    workers: usize,
    #[cfg(feature = "parallel")]
    inner: Option<rayon::ThreadPool>,
}

impl Pool {
    #[cfg(feature = "parallel")]
    pub(crate) fn new(workers: usize) -> Self {
        let workers = workers.max(1);
        let inner = (workers > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("failed to start worker threads")
        });
        Pool { workers, inner }
    }

    #[cfg(not(feature = "parallel"))]
    pub(crate) fn new(_workers: usize) -> Self {
        Pool { workers: 1 }
    }

    pub(crate) fn workers(&self) -> usize {
        self.workers
    }

    /// Order-preserving map.
    pub(crate) fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.inner {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

/// Caps worker count so that `workers x memory_kib` stays within the budget.
pub(crate) fn bounded_workers(requested: usize, memory_kib: u32, budget_kib: Option<u64>) -> usize {
    let requested = requested.max(1);
    match budget_kib {
        Some(budget) => {
            let fit = (budget / u64::from(memory_kib.max(1))).max(1);
            requested.min(usize::try_from(fit).unwrap_or(usize::MAX))
        }
        None => requested,
    }
}
