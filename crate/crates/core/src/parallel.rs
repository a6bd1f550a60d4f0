//! Shared worker pool, capped by the `EHGLUE_THREADS` environment variable.

use rayon::prelude::*;
use std::sync::OnceLock;

pub const THREADS_ENV: &str = "EHGLUE_THREADS";

pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            builder = builder.num_threads(n);
        }
        builder.build().expect("worker pool")
    })
}

/// Maps `f` over `items` in parallel, keeping the input order.
pub fn ordered_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    pool().install(|| items.par_iter().map(f).collect())
}
