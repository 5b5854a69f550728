//! Execution mode for the data-parallel loops.
//!
//! Every parallel code path has a sequential twin that produces bit-identical
//! output: work is split per item (record, tree, kernel) and results are
//! gathered back in index order, so no floating-point reduction ever crosses
//! a thread boundary. Without the `parallel` feature, [`Parallelism::Rayon`]
//! silently runs sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Rayon,
}

impl Parallelism {
    /// Whether work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Rayon
    }
}

/// Map `f` over `0..n`, collecting results in index order.
pub(crate) fn map_indexed<T, F>(n: usize, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}
