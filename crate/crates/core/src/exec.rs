//! Choice between rayon fan-out and a plain sequential loop.
//!
//! Without the `parallel` feature every [`Execution`] runs sequentially.

use crate::error::Result;
use crate::solver::{solve_with, Problem, Solution, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `items.iter().map(f).collect()`, in input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// The first `i` in `0..count` (by index) for which `f` returns `Some`.
    pub fn find_map_first<R, F>(self, count: u64, f: F) -> Option<R>
    where
        R: Send,
        F: Fn(u64) -> Option<R> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..count).into_par_iter().find_map_first(f);
        }
        (0..count).find_map(f)
    }
}

/// Solves independent problems, results in input order.
pub fn solve_many(problems: &[Problem], options: &SolverOptions, exec: Execution) -> Vec<Result<Solution>> {
    exec.map(problems, |p| solve_with(p, options))
}
