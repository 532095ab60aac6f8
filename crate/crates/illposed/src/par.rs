//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers fan out over the rayon
//! pool unless [`set_sequential`] has been switched on. Without the feature
//! everything runs on the calling thread. Results are always returned in
//! index order, so reductions done by the caller are deterministic.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force the sequential code path at runtime (used by the benches).
pub fn set_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}
