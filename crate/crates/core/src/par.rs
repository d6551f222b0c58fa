//! Data-parallel map-reduce over an index range, with a sequential path that
//! is always available and used when the `parallel` feature is off.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can run the parallel path.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Folds `0..len` into per-worker accumulators and merges them.
///
/// `merge` must be associative and commutative with `init()` as identity;
/// the result is then independent of the split.
pub fn fold_range<A, I, F, M>(exec: Exec, len: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, usize) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..len)
                .into_par_iter()
                .fold(&init, |mut acc, i| {
                    fold(&mut acc, i);
                    acc
                })
                .reduce(&init, &merge)
        }
        _ => {
            let mut acc = init();
            for i in 0..len {
                fold(&mut acc, i);
            }
            acc
        }
    }
}

/// Maps every item, preserving order.
pub fn map_vec<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
