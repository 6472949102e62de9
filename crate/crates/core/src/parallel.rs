//! Execution shim: rayon when the `parallel` feature is on, plain
//! iterators otherwise. Every data-parallel loop in the crate funnels
//! through these three helpers so the feature toggles one place.
//!
//! The sequential bounds are intentionally identical to the parallel ones;
//! callers compile unchanged under either feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, preserving input order.
#[cfg(feature = "parallel")]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over a slice, preserving input order.
#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Maps a fallible `f` over a slice, stopping at the first error.
///
/// Under rayon the error returned is not necessarily the one with the
/// lowest index; callers that need a specific error order should map
/// sequentially.
#[cfg(feature = "parallel")]
pub fn try_map_slice<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps a fallible `f` over a slice, stopping at the first error.
#[cfg(not(feature = "parallel"))]
pub fn try_map_slice<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Caps the worker-thread count for the whole process; 0 keeps the
/// runtime default. Returns false when a pool already exists and the
/// setting cannot apply. The sequential build accepts any value and
/// does nothing.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> bool {
    if n == 0 {
        return true;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .is_ok()
}

/// Caps the worker-thread count for the whole process; 0 keeps the
/// runtime default. Returns false when a pool already exists and the
/// setting cannot apply. The sequential build accepts any value and
/// does nothing.
#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> bool {
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indexed_preserves_order() {
        let out = map_indexed(100, |i| i * 2);
        assert_eq!(out, (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }

    #[test]
    fn map_slice_preserves_order() {
        let input: Vec<i64> = (0..1000).collect();
        let out = map_slice(&input, |x| x + 1);
        assert_eq!(out, (1..1001).collect::<Vec<_>>());
    }

    #[test]
    fn try_map_slice_propagates_errors() {
        let input = vec![1, 2, 3];
        let ok: Result<Vec<i32>, String> = try_map_slice(&input, |x| Ok(x * 10));
        assert_eq!(ok.unwrap(), vec![10, 20, 30]);
        let err: Result<Vec<i32>, String> =
            try_map_slice(&input, |x| if *x == 2 { Err("two".into()) } else { Ok(*x) });
        assert!(err.is_err());
    }
}
