//! Data-parallel inner loops with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch through rayon;
//! without it they run sequentially. [`with_sequential`] additionally forces
//! the sequential path at runtime within a scope, so both paths can be
//! exercised and benchmarked from the same binary. Results are always
//! collected in input order, so the two paths produce identical output.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// True when the parallel feature is compiled in.
pub fn parallel_compiled() -> bool {
    cfg!(feature = "parallel")
}

/// Runs `f` with the parallel helpers forced onto their sequential path.
///
/// The override is per-thread and applies to `exec` calls made directly from
/// the closure; it is restored on exit even if `f` panics.
pub fn with_sequential<R>(f: impl FnOnce() -> R) -> R {
    struct Reset(bool);
    impl Drop for Reset {
        fn drop(&mut self) {
            FORCE_SEQUENTIAL.with(|c| c.set(self.0));
        }
    }
    let _reset = FORCE_SEQUENTIAL.with(|c| {
        let prev = c.get();
        c.set(true);
        Reset(prev)
    });
    f()
}

fn sequential_forced() -> bool {
    FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    if sequential_forced() {
        items.iter().map(f).collect()
    } else {
        items.par_iter().map(f).collect()
    }
}

/// Maps `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Maps `f` over indices `0..n`, preserving order.
pub fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    map(&idx, |&i| f(i))
}
