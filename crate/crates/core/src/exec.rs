//! Data-parallel loops with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs
//! on the current rayon pool; without it every mode runs sequentially.
//! Both modes produce identical results: callers derive per-item randomness
//! from the item index and merge with order-independent reductions.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `f(0), f(1), …, f(n-1)` in index order.
    pub fn map<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Folds `f(i)` into an accumulator. `merge` must be associative and
    /// commutative for results to be schedule-independent.
    pub fn fold<A, F, M>(self, n: usize, identity: A, f: F, merge: M) -> A
    where
        A: Clone + Send + Sync,
        F: Fn(&mut A, usize) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n)
                .into_par_iter()
                .fold(
                    || identity.clone(),
                    |mut acc, i| {
                        f(&mut acc, i);
                        acc
                    },
                )
                .reduce(|| identity.clone(), &merge);
        }
        let mut acc = identity.clone();
        for i in 0..n {
            f(&mut acc, i);
        }
        merge(identity, acc)
    }

    /// The lowest-index `Some` produced by `f`.
    pub fn find_first<R, F>(self, n: usize, f: F) -> Option<R>
    where
        R: Send,
        F: Fn(usize) -> Option<R> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().find_map_first(f);
        }
        (0..n).find_map(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        for mode in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(mode.map(5, |i| i * i), vec![0, 1, 4, 9, 16]);
            assert_eq!(
                mode.fold(1000, 0u64, |a, i| *a += i as u64, |a, b| a + b),
                499_500
            );
            assert_eq!(
                mode.find_first(10_000, |i| (i % 97 == 96).then_some(i)),
                Some(96)
            );
            assert_eq!(mode.find_first(10, |_| None::<()>), None);
        }
    }
}
