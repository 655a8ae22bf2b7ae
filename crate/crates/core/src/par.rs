//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! the rayon pool; without it every helper runs sequentially. Results never
//! depend on how work is scheduled.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    #[cfg(feature = "parallel")]
    fn use_pool(self) -> bool {
        self == Execution::Parallel
    }
}

/// `(0..len).map(f).collect()`, preserving index order.
pub fn map_indexed<T, F>(execution: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.use_pool() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = execution;
    (0..len).map(f).collect()
}

/// First `Some` result in index order.
pub fn find_map_first<T, F>(execution: Execution, len: usize, f: F) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.use_pool() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().find_map_first(f);
    }
    let _ = execution;
    (0..len).find_map(f)
}

/// Counts indices satisfying `pred`.
pub fn count_where<F>(execution: Execution, len: usize, pred: F) -> usize
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.use_pool() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().filter(|&i| pred(i)).count();
    }
    let _ = execution;
    (0..len).filter(|&i| pred(i)).count()
}
