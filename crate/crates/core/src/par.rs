//! Feature-switched data parallelism.
//!
//! With the default `parallel` feature the bulk loops (candidate scoring,
//! pairwise overlaps, delta matching) fan out over rayon; without it they
//! run sequentially. Output order is the input order either way, so results
//! are identical across both builds.

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
