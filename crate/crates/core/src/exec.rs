//! Pluggable execution of independent work items.
//!
//! Estimators map over samples, boxes or grid points through an
//! [`Executor`]. Results always come back in index order, so aggregation is
//! independent of the degree of parallelism.

use alloc::vec::Vec;

pub trait Executor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every item on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
