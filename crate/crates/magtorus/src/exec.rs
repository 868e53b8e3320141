//! Runtime switch between serial and data-parallel execution.
//!
//! The `parallel` cargo feature compiles the rayon code paths in; this switch
//! decides at runtime whether they are used. Serial is the default so that CI
//! runs (and the CLI, unless `--parallel` is passed) produce bit-identical
//! output. The parallel paths only split work whose per-item results are
//! written to disjoint slots, so enabling them does not reorder any floating
//! point reduction.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(false);

/// Enable or disable the rayon code paths (no-op without the `parallel` feature).
pub fn set_parallel(on: bool) {
    PARALLEL.store(on, Ordering::Relaxed);
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::Relaxed)
}

/// Map `f` over `0..n`, writing `f(i)` into `out[i]`.
///
/// `out` must have length `n`. Each slot is written exactly once, so the
/// parallel and serial paths produce identical bytes.
pub fn for_each_slot<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(i, slot)| {
            *slot = f(i);
        });
        return;
    }
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = f(i);
    }
}

/// Collect `f(i)` for `i in 0..n` into a vector (parallel when enabled).
pub fn collect_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(usize) -> T + Sync,
{
    let mut out = vec![T::default(); n];
    for_each_slot(&mut out, f);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_map_matches_serial() {
        let serial: Vec<u64> = (0..257).map(|i| (i as u64).wrapping_mul(2654435761)).collect();
        set_parallel(true);
        let par = collect_indexed(257, |i| (i as u64).wrapping_mul(2654435761));
        set_parallel(false);
        assert_eq!(serial, par);
    }
}
