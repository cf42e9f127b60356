//! Executor abstraction for embarrassingly parallel Monte Carlo work.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `f(0..n)`, returning results in index order.
    fn map_indexed<T: Send>(&self, n: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T: Send>(&self, n: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        (0..n).map(f).collect()
    }
}
