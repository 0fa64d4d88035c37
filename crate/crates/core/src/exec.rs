//! Execution strategy for data-parallel loops.
//!
//! Every parallel loop in the crate is an order-preserving indexed map, so the
//! sequential and rayon-backed paths return identical vectors. Randomness never
//! crosses a loop boundary: each index derives its own seed.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How an indexed map is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to [`Execution::Sequential`] when the `parallel` feature is off.
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
    /// `(0..n).map(f).collect()`, possibly across a thread pool.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over consecutive `chunk`-sized pieces of `items` and
    /// concatenates the outputs in order.
    pub fn map_chunks<S, T, F>(self, items: &[S], chunk: usize, f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&[S]) -> Vec<T> + Sync + Send,
    {
        let chunk = chunk.max(1);
        match self {
            Execution::Sequential => items.chunks(chunk).flat_map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items
                .par_chunks(chunk)
                .map(f)
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect(),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel => items.chunks(chunk).flat_map(f).collect(),
        }
    }
}

/// Runs `f` with the global parallelism capped at `threads` workers.
///
/// `None` uses the default pool. Without the `parallel` feature the argument is
/// ignored.
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = threads {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
            {
                return pool.install(f);
            }
            log::warn!("could not build a {n}-thread pool; using the default pool");
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Per-trial seed derived from a base seed.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    base ^ trial
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let f = |i: usize| (i as f64).sqrt() * 3.0;
        let a = Execution::Sequential.map_indexed(1000, f);
        let b = Execution::Parallel.map_indexed(1000, f);
        assert_eq!(a, b);

        let xs: Vec<u32> = (0..1003).collect();
        let g = |c: &[u32]| c.iter().map(|x| x * 2).collect::<Vec<_>>();
        assert_eq!(
            Execution::Sequential.map_chunks(&xs, 64, g),
            Execution::Parallel.map_chunks(&xs, 64, g)
        );
    }

    #[test]
    fn thread_cap_does_not_change_results() {
        let run = || Execution::Parallel.map_indexed(257, |i| i * i);
        assert_eq!(with_threads(Some(1), run), with_threads(Some(4), run));
    }
}
